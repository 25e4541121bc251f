"""
Manufactured solutions for convergence studies.

The exact fields on ``[0, 1]`` are

    v     = v_bar     + A sin^2(k pi x) (1 + sin(t)/2)
    u     =             A sin(2 k pi x) cos(t)
    theta = theta_bar + A sin^2(k pi x) (1 + cos(t)/2)
    chi   = -cos(pi x) + A sin(2 k pi x) (1 + sin(t)/2)

which hold the far-field values at both ends for all t.  The forcing that
makes them solve the system is derived symbolically.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import sympy as sp

from ..state import FarField, Grid1D, State

__all__ = [
    "DEFAULT_FAR",
    "ManufacturedProblem",
    "manufactured_state",
    "l2_error",
    "observed_orders",
    "convergence_ladder",
]

DEFAULT_FAR = FarField(v_bar=2.0, theta_bar=1.5)


@lru_cache(maxsize=32)
def _compile(a, b, R, eps, kappa_tilde, beta, c_v, v_bar, theta_bar, k, amp):
    x, t = sp.symbols("x t", real=True)
    s2 = sp.sin(k * sp.pi * x) ** 2
    v = v_bar + amp * s2 * (1 + sp.sin(t) / 2)
    u = amp * sp.sin(2 * k * sp.pi * x) * sp.cos(t)
    th = theta_bar + amp * s2 * (1 + sp.cos(t) / 2)
    chi = -sp.cos(sp.pi * x) + amp * sp.sin(2 * k * sp.pi * x) * (1 + sp.sin(t) / 2)

    d = sp.diff
    p = -a / v**2 + R * th / (v - b)
    mu = (chi**3 - chi) / eps - eps * d(d(chi, x) / v, x)
    kappa = kappa_tilde * th**beta
    u_x = d(u, x)
    s_v = d(v, t) - u_x
    s_u = d(u, t) + d(p, x) - d(u_x / v, x) + eps / 2 * d(d(chi, x) ** 2 / v**2, x)
    s_th = (c_v * d(th, t) + R * th * u_x / (v - b) - d(kappa * d(th, x) / v, x)
            - u_x**2 / v - v * mu**2)
    s_chi = (d(chi, t) - eps * d(chi, x, 2) + eps * d(chi, x) * d(v, x) / v
             + v / eps * (chi**3 - chi))
    exact = sp.lambdify((t, x), [v, u, th, chi], "numpy")
    source = sp.lambdify((t, x), [s_v, s_u, s_th, s_chi], "numpy")
    return exact, source


def _full(values, x):
    return [np.broadcast_to(np.asarray(f, dtype=float), x.shape).copy() for f in values]


@dataclass(frozen=True)
class ManufacturedProblem:
    """Exact solution and forcing for given fluid constants."""

    params: object
    far: FarField = DEFAULT_FAR
    k: int = 1
    amplitude: float = 0.1

    def _funcs(self):
        p = self.params
        return _compile(p.a, p.b, p.R, p.epsilon, p.kappa_tilde, p.beta, p.c_v,
                        self.far.v_bar, self.far.theta_bar, int(self.k),
                        float(self.amplitude))

    def exact(self, t, x):
        return _full(self._funcs()[0](t, x), x)

    def source(self, t, x):
        s = _full(self._funcs()[1](t, x), x)
        for f in s:
            f[0] = f[-1] = 0.0
        return s

    def state(self, grid, t=0.0):
        v, u, th, chi = self.exact(t, grid.x)
        return State(grid, t, v, u, th, chi)


def manufactured_state(grid, far, params, k=1, amplitude=0.1):
    if params is None:
        raise ValueError("manufactured profile needs the fluid parameters")
    return ManufacturedProblem(params, far, k, amplitude).state(grid)


def l2_error(problem, state):
    """Discrete L2 norm of the error over all four fields."""
    exact = problem.exact(state.t, state.grid.x)
    w = state.grid.weights
    total = sum(np.dot(w, (f - e) ** 2) for f, e in zip(state.fields(), exact))
    return float(np.sqrt(total))


def observed_orders(errors, ratio=2.0):
    errors = np.asarray(errors, dtype=float)
    return np.log(errors[:-1] / errors[1:]) / np.log(ratio)


def convergence_ladder(problem, levels, n0=128, t_end=0.2, dt_of_dx=None,
                       stepper="imex"):
    """Errors of the forced run at ``n0 * 2**i`` nodes, i < levels.

    ``dt_of_dx`` maps the mesh width to the time step; the step is then
    shrunk so that it divides ``t_end``.  Returns a list of dicts with keys
    ``n, dx, dt, error``.
    """
    from .run import run
    from .stepping import SimConfig

    if dt_of_dx is None:
        dt_of_dx = lambda dx: 0.5 * dx**2  # noqa: E731
    rows = []
    for i in range(levels):
        n = n0 * 2**i
        grid = Grid1D(0.0, 1.0, n + 1)
        dt = t_end / np.ceil(t_end / dt_of_dx(grid.dx))
        cfg = SimConfig(dt=dt, t_end=t_end, output_every=10**9, stepper=stepper,
                        cfl=0.9)
        result = run(problem.params, problem.far, problem.state(grid), cfg,
                     source=problem.source)
        rows.append(dict(n=n, dx=grid.dx, dt=dt, error=l2_error(problem, result.snapshots[-1])))
    return rows
