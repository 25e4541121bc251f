"""Time loop, series bookkeeping and snapshot emission."""

import warnings
from dataclasses import dataclass, field

import numpy as np

from ..energy import energy_report
from ..errors import ConfigError, SolverAbort
from .operators import chemical_potential, face_grad, face_mean
from .stepping import picard_step, step_imex

__all__ = ["SERIES_COLUMNS", "RunResult", "ns_monitor_values", "series_row", "run"]

SERIES_COLUMNS = (
    "t", "e_kin", "e_W", "e_phi", "e_psi", "e_total", "V", "mass",
    "min_v", "max_v", "min_theta", "max_theta", "max_abs_chi", "M_v", "tilde_V",
)


@dataclass
class RunResult:
    """Artifacts of a run.  Unpacks as ``snapshots, series``."""

    snapshots: list
    series: np.ndarray
    e0: float
    mass0: float
    steps: list = field(default_factory=list)
    picard: list = field(default_factory=list)
    boundary_deviation: float = 0.0
    abort: dict = None

    def __iter__(self):
        return iter((self.snapshots, self.series))


def ns_monitor_values(far, state):
    """``(M_v, tilde_V)`` with ``tilde_V`` carrying its trailing +1."""
    w, dx = state.grid.weights, state.grid.dx
    vf = face_mean(state.v)
    thf = face_mean(state.theta)
    kin = np.dot(w, state.u**2) / (2 * far.theta_bar)
    grad = dx * np.sum(face_grad(state.theta, dx) ** 2 / (vf * thf**2)
                       + face_grad(state.u, dx) ** 2 / (vf * thf))
    return 1.0 + float(np.max(state.v)), float(kin + grad + 1.0)


def series_row(params, far, state, mode="NSAC"):
    mu = chemical_potential(params, state) if mode == "NSAC" else np.zeros(state.grid.n)
    rep = energy_report(params, far, state, mu=mu)
    m_v, tilde_v = ns_monitor_values(far, state)
    return (
        state.t, rep.e_kinetic, rep.e_interface, rep.e_phi, rep.e_psi, rep.e_total,
        rep.dissipation_v, rep.mass_integral,
        float(state.v.min()), float(state.v.max()),
        float(state.theta.min()), float(state.theta.max()),
        float(np.max(np.abs(state.chi))), m_v, tilde_v,
    )


def _outer_deviation(far, initial, state):
    n = state.grid.n
    k = max(1, int(np.ceil(0.1 * n)))
    idx = np.r_[0:k, n - k:n]
    dev = max(
        np.max(np.abs(state.v[idx] - far.v_bar)),
        np.max(np.abs(state.u[idx])),
        np.max(np.abs(state.theta[idx] - far.theta_bar)),
        np.max(np.abs(state.chi[idx] - initial.chi[idx])),
    )
    return float(dev)


def check_mode(params, config):
    """Enforce the conductivity hypothesis of the coupled model."""
    if config.mode == "NSAC" and params.beta == 0:
        reason = "the coupled model is only covered for beta > 0"
        if not config.allow_unproven:
            raise ConfigError("params.beta", reason + "; pass allow_unproven to override")
        warnings.warn(reason, RuntimeWarning, stacklevel=3)


def run(params, far, initial, config, source=None):
    """Advance ``initial`` to ``config.t_end``.

    A series row is recorded after every step and a snapshot every
    ``config.output_every`` steps (plus the initial and final states).  In
    NS mode chi is frozen at +1 and mu vanishes.

    Raises
    ------
    SolverAbort
        Propagated from the stepper; the partial :class:`RunResult` is
        attached as ``exc.partial``.
    """
    check_mode(params, config)
    state = initial.copy()
    if config.mode == "NS":
        state.chi = np.ones(state.grid.n)
    first = energy_report(params, far, state,
                          mu=None if config.mode == "NSAC" else np.zeros(state.grid.n))
    result = RunResult(snapshots=[state.copy()], series=None, e0=first.e_total,
                       mass0=first.mass_integral, steps=[0])
    rows = []
    n_steps = config.n_steps
    stepper = step_imex if config.stepper == "imex" else picard_step
    try:
        for k in range(1, n_steps + 1):
            out = stepper(params, far, state, config, source=source, step=k)
            if config.stepper == "picard":
                state, report = out
                result.picard.append(report)
            else:
                state = out
            rows.append(series_row(params, far, state, config.mode))
            result.boundary_deviation = max(result.boundary_deviation,
                                            _outer_deviation(far, initial, state))
            if k % config.output_every == 0 or k == n_steps:
                result.snapshots.append(state.copy())
                result.steps.append(k)
    except SolverAbort as exc:
        result.series = _as_series(rows)
        result.abort = exc.record()
        exc.partial = result
        raise
    result.series = _as_series(rows)
    return result


def _as_series(rows):
    dtype = [(name, float) for name in SERIES_COLUMNS]
    return np.array([tuple(r) for r in rows], dtype=dtype)
