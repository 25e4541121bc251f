"""
One-step integrators for the Lagrangian Navier-Stokes/Allen-Cahn system.

Both steppers share a frozen-coefficient stage: given the state at time
level n and an iterate ``w`` on the new level, it solves

    (u - u^n)/dt - ((u_x)/v_w)_x           = g1(w)
    c_v (th - th^n)/dt - (kappa(th_w) th_x / v_w)_x = g2(w)
    (chi - chi^n)/dt - eps chi_xx          = g3(w)
    v = v^n + dt u_x

with g1 = -p_x - eps/2 (chi_x^2/v^2)_x, g2 = v mu^2 + u_x^2/v - R th u_x/(v-b)
and g3 = -(v/eps)(chi^3 - chi) - eps chi_x v_x / v, all evaluated at ``w``.
The IMEX step is one stage with ``w`` equal to the old state; the Picard
step repeats the stage until successive iterates agree.
"""

from dataclasses import dataclass, field

import numpy as np

from ..errors import CflViolation, NoConvergence, NonpositiveTemperature, VolumeCutoff
from .operators import central, chemical_potential, divergence, face_grad, face_mean
from .tridiag import solve_tridiagonal

__all__ = [
    "SimConfig",
    "PicardReport",
    "sound_speed",
    "max_stable_dt",
    "check_cfl",
    "step_imex",
    "picard_step",
]

MODES = ("NSAC", "NS")
STEPPERS = ("imex", "picard")


@dataclass(frozen=True)
class SimConfig:
    dt: float
    t_end: float
    cfl: float = 0.4
    mode: str = "NSAC"
    stepper: str = "imex"
    picard_tol: float = 1e-10
    picard_max_iter: int = 50
    output_every: int = 1
    allow_unproven: bool = False

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if not self.t_end > 0:
            raise ValueError("t_end must be positive")
        if not 0 < self.cfl < 1:
            raise ValueError("cfl must lie in (0, 1)")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.stepper not in STEPPERS:
            raise ValueError(f"stepper must be one of {STEPPERS}")
        if int(self.output_every) != self.output_every or self.output_every < 1:
            raise ValueError("output_every must be a positive integer")

    @property
    def n_steps(self):
        return int(np.ceil(self.t_end / self.dt - 1e-9))


@dataclass
class PicardReport:
    iterations: int = 0
    diffs: list = field(default_factory=list)
    contraction: list = field(default_factory=list)
    m1_obs: float = np.inf
    m2_obs: float = np.inf
    m_big_obs: float = 0.0
    converged: bool = False


def sound_speed(params, v, theta):
    """Adiabatic Lagrangian sound speed sqrt(max(0, -p_v + theta p_theta^2 / c_v))."""
    p_v = 2 * params.a / v**3 - params.R * theta / (v - params.b) ** 2
    p_th = params.R / (v - params.b)
    return np.sqrt(np.maximum(0.0, -p_v + theta * p_th**2 / params.c_v))


def max_stable_dt(params, state, cfl):
    speed = np.abs(state.u) + sound_speed(params, state.v, state.theta)
    top = float(np.max(speed))
    return np.inf if top == 0 else cfl * state.grid.dx / top


def check_cfl(params, state, dt, cfl, step=None):
    limit = max_stable_dt(params, state, cfl)
    if dt > limit:
        speed = np.abs(state.u) + sound_speed(params, state.v, state.theta)
        raise CflViolation(
            f"dt={dt!r} exceeds the CFL limit {limit!r}",
            step=step, t=state.t, node=int(np.argmax(speed)),
        )


def _diffusion_solve(old, coef_face, dt, dx, rhs_extra, capacity=1.0):
    """Backward-Euler solve of capacity*(y - old)/dt - (coef y_x)_x = rhs_extra.

    Solved for the increment ``y - old`` so that steady states are kept
    exactly.  Boundary rows hold the old boundary values.
    """
    n = old.size
    r = dt / (capacity * dx**2)
    diag = np.ones(n)
    lower = np.zeros(n - 1)
    upper = np.zeros(n - 1)
    diag[1:-1] += r * (coef_face[:-1] + coef_face[1:])
    lower[:-1] = -r * coef_face[:-1]
    upper[1:] = -r * coef_face[1:]
    rhs = dt / capacity * (rhs_extra + divergence(coef_face * face_grad(old, dx), dx))
    rhs[0] = rhs[-1] = 0.0
    inc = solve_tridiagonal(lower, diag, upper, rhs, check=False)
    inc[0] = inc[-1] = 0.0  # pivoting can leave round-off in the identity rows
    return old + inc


def _stage(params, state, w, dt, mode, source=None):
    """One frozen-coefficient pass; returns new (v, u, theta, chi)."""
    dx = state.grid.dx
    eps = params.epsilon
    v, u, th, chi = w.v, w.u, w.theta, w.chi
    vf = face_mean(v)
    p = -params.a / v**2 + params.R * th / (v - params.b)

    if source is not None:
        s_v, s_u, s_th, s_chi = source(state.t, state.grid.x)
    else:
        s_v = s_u = s_th = s_chi = 0.0

    g1 = -central(p, dx)
    if mode == "NSAC":
        g1 = g1 - 0.5 * eps * divergence(face_grad(chi, dx) ** 2 / vf**2, dx)
        mu = chemical_potential(params, w)
    else:
        mu = np.zeros_like(v)
    u_new = _diffusion_solve(state.u, 1.0 / vf, dt, dx, g1 + s_u)

    u_x = central(u, dx)
    g2 = v * mu**2 + u_x**2 / v - params.R * th * u_x / (v - params.b)
    kappa_f = params.kappa_tilde * face_mean(th) ** params.beta
    th_new = _diffusion_solve(state.theta, kappa_f / vf, dt, dx, g2 + s_th,
                              capacity=params.c_v)

    if mode == "NSAC":
        chi_x = central(chi, dx)
        g3 = -(v / eps) * (chi**3 - chi) - eps * chi_x * central(v, dx) / v
        chi_new = _diffusion_solve(state.chi, np.full(vf.size, eps), dt, dx, g3 + s_chi)
    else:
        chi_new = state.chi.copy()

    v_new = state.v + dt * (central(u_new, dx) + s_v)
    v_new[0], v_new[-1] = state.v[0], state.v[-1]
    return v_new, u_new, th_new, chi_new


def _check_bounds(params, v, th, step, t):
    bad = np.flatnonzero(~(th > 0))
    if bad.size:
        i = int(bad[0])
        raise NonpositiveTemperature(f"theta[{i}]={th[i]!r} <= 0", step=step, t=t, node=i)
    bad = np.flatnonzero(~(v > params.v_min))
    if bad.size:
        i = int(bad[0])
        raise VolumeCutoff(f"v[{i}]={v[i]!r} <= b + h", step=step, t=t, node=i)


def step_imex(params, far, state, config, source=None, step=None):
    """Advance ``state`` by one first-order IMEX step of size ``config.dt``.

    ``source(t, x)`` optionally returns forcing terms (s_v, s_u, s_theta,
    s_chi) evaluated explicitly at the old time level.
    """
    dt = config.dt
    check_cfl(params, state, dt, config.cfl, step=step)
    v, u, th, chi = _stage(params, state, state, dt, config.mode, source)
    t_new = state.t + dt
    _check_bounds(params, v, th, step, t_new)
    return type(state)(state.grid, t_new, v, u, th, chi)


def _l2(a, dx):
    return float(np.sqrt(dx * np.sum(a * a)))


def _solution_norm(far, v, u, th, chi, dx):
    chi_x = face_grad(chi, dx)
    h1 = 0.0
    for f in (v - far.v_bar, u, th - far.theta_bar):
        h1 += _l2(f, dx) ** 2 + dx * np.sum(face_grad(f, dx) ** 2)
    h1 += dx * np.sum(chi_x**2) + dx * np.sum(face_grad(chi_x, dx) ** 2)
    return float(np.sqrt(h1) + _l2(chi**2 - 1, dx))


def picard_step(params, far, state, config, source=None, step=None):
    """Advance one step by iterating the frozen-coefficient stage.

    Returns ``(new_state, PicardReport)``.  Raises NoConvergence when
    ``picard_max_iter`` passes do not reach ``picard_tol``.
    """
    dt = config.dt
    dx = state.grid.dx
    check_cfl(params, state, dt, config.cfl, step=step)
    cls = type(state)
    t_new = state.t + dt
    report = PicardReport()
    w = state
    for k in range(1, config.picard_max_iter + 1):
        v, u, th, chi = _stage(params, state, w, dt, config.mode, source)
        _check_bounds(params, v, th, step, t_new)
        diff = max(_l2(v - w.v, dx), _l2(u - w.u, dx),
                   _l2(th - w.theta, dx), _l2(chi - w.chi, dx))
        report.iterations = k
        report.diffs.append(diff)
        if len(report.diffs) > 1:
            prev = report.diffs[-2]
            report.contraction.append(diff / prev if prev > 0 else 0.0)
        report.m1_obs = min(report.m1_obs, float(th.min()))
        report.m2_obs = min(report.m2_obs, float(v.min()))
        report.m_big_obs = max(report.m_big_obs, _solution_norm(far, v, u, th, chi, dx))
        w = cls(state.grid, t_new, v, u, th, chi)
        if diff < config.picard_tol:
            report.converged = True
            return w, report
    raise NoConvergence(
        f"Picard iteration stalled after {report.iterations} passes "
        f"(last difference {report.diffs[-1]!r})",
        step=step, t=state.t,
    )
