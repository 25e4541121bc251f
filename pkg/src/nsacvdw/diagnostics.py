"""
Runtime checks derived from the a priori estimates of the model.

Every check is a pure function of run artifacts (snapshots, the energy
series and the configuration) and returns a :class:`CheckResult`; a
:class:`DiagnosticsReport` collects them and serializes to JSON.
"""

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .energy import alpha_roots, phi, phi_prime, psi, sublevel_interval
from .errors import DomainError, InsufficientCadence, PreconditionFailed
from .solver.operators import central, face_grad, face_mean
from .solver.run import ns_monitor_values

__all__ = [
    "TOL_CHI",
    "KAZHIKHOV_THRESHOLD",
    "CheckResult",
    "DiagnosticsReport",
    "KazhikhovTrace",
    "check_pointwise_bounds",
    "energy_defect",
    "energy_budget_check",
    "energy_budget",
    "bounds_over_run",
    "series_bounds_check",
    "AverageBounds",
    "ns_monitor_check",
    "window_averages",
    "cell_average_bounds",
    "cell_average_check",
    "kazhikhov_reconstruction",
    "truncation_norms",
    "truncation_slack",
    "truncation_check",
    "ns_monitors",
    "sobolev_sup_check",
]

TOL_CHI = 1e-8
KAZHIKHOV_THRESHOLD = 5e-2


def _clean(value):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to strings."""
    if isinstance(value, dict):
        return {str(k): _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_clean(v) for v in value.tolist()]
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else repr(value)
    return value


@dataclass
class CheckResult:
    name: str
    ok: bool
    worst_margin: float
    details: dict = field(default_factory=dict)

    def to_dict(self):
        return _clean(asdict(self))


@dataclass
class DiagnosticsReport:
    checks: list = field(default_factory=list)

    def add(self, result):
        self.checks.append(result)
        return result

    @property
    def ok(self):
        return all(c.ok for c in self.checks)

    @property
    def failed(self):
        return [c.name for c in self.checks if not c.ok]

    def __getitem__(self, name):
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_json(self):
        return json.dumps([c.to_dict() for c in self.checks], indent=2, sort_keys=True)


# -- pointwise bounds ------------------------------------------------------


def check_pointwise_bounds(params, state, tol_chi=TOL_CHI):
    """v > b + h, theta > 0 and |chi| <= 1 + tol_chi at every node."""
    v_margin = state.v - params.v_min
    chi_excess = np.abs(state.chi) - 1.0
    iv = int(np.argmin(v_margin))
    it = int(np.argmin(state.theta))
    ic = int(np.argmax(chi_excess))
    margins = [float(v_margin[iv]), float(state.theta[it]), float(tol_chi - chi_excess[ic])]
    ok = margins[0] > 0 and margins[1] > 0 and margins[2] >= 0
    return CheckResult(
        "pointwise_bounds", bool(ok), min(margins),
        dict(t=state.t, min_v_margin=margins[0], min_v_node=iv,
             min_theta=margins[1], min_theta_node=it,
             max_abs_chi_excess=float(chi_excess[ic]), max_abs_chi_node=ic),
    )


def bounds_over_run(params, snapshots, tol_chi=TOL_CHI):
    """Pointwise bounds for every snapshot; the worst one is reported."""
    results = [check_pointwise_bounds(params, s, tol_chi) for s in snapshots]
    worst = min(results, key=lambda r: r.worst_margin)
    failing = [r.details["t"] for r in results if not r.ok]
    details = dict(worst.details, n_snapshots=len(results), failing_times=failing[:20])
    return CheckResult("pointwise_bounds", not failing, worst.worst_margin, details)


def series_bounds_check(params, series, tol_chi=TOL_CHI):
    """Pointwise bounds from the per-step extrema stored in the series."""
    v_margin = float(np.min(series["min_v"])) - params.v_min
    th = float(np.min(series["min_theta"]))
    chi = float(np.max(series["max_abs_chi"])) - 1.0
    margins = [v_margin, th, tol_chi - chi]
    ok = v_margin > 0 and th > 0 and chi <= tol_chi
    return CheckResult("step_bounds", bool(ok), min(margins),
                       dict(min_v_margin=v_margin, min_theta=th, max_abs_chi_excess=chi,
                            steps=int(series.size)))


# -- energy ----------------------------------------------------------------


def energy_defect(series, e0, t0=0.0):
    """E(t) + sum V dt - E0 per series row (right-endpoint rule in time)."""
    t = np.asarray(series["t"], dtype=float)
    dt = np.diff(np.concatenate(([t0], t)))
    return series["e_total"] + np.cumsum(series["V"] * dt) - e0


def energy_budget_check(series, e0, tol_model):
    """|defect(t)| <= tol_model(t) for every row.

    ``tol_model`` is a scalar or an array matching the series.  The exact
    law has zero defect; the discrete scheme is granted a budget.
    """
    defect = energy_defect(series, e0)
    tol = np.broadcast_to(np.asarray(tol_model, dtype=float), defect.shape)
    margin = tol - np.abs(defect)
    i = int(np.argmin(margin)) if defect.size else 0
    return CheckResult(
        "energy_budget", bool(np.all(margin >= 0)),
        float(margin[i]) if defect.size else 0.0,
        dict(max_abs_defect=float(np.max(np.abs(defect))) if defect.size else 0.0,
             final_defect=float(defect[-1]) if defect.size else 0.0,
             worst_row=i),
    )


def energy_budget(series, constant, dx):
    """Budget C (dx^2 + dt) (1 + t) for the rows of ``series``.

    The constant term absorbs the start-up transient, whose defect is
    already first order after a few steps.
    """
    t = np.asarray(series["t"], dtype=float)
    dt = t[1] - t[0] if t.size > 1 else (t[0] if t.size else 0.0)
    return constant * (dx**2 + dt) * (1.0 + t)


# -- cell averages ---------------------------------------------------------


def window_averages(x, f, edges):
    """Averages of the piecewise-linear interpolant of ``f`` over windows."""
    out = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        inner = (x > lo) & (x < hi)
        xs = np.concatenate(([lo], x[inner], [hi]))
        fs = np.interp(xs, x, f)
        out.append(np.trapezoid(fs, xs) / (hi - lo))
    return np.array(out)


def _unit_edges(grid):
    edges = np.arange(math.ceil(grid.x_min), math.floor(grid.x_max) + 1, dtype=float)
    return edges


@dataclass(frozen=True)
class AverageBounds:
    v_interval: tuple
    theta_interval: tuple
    form: str
    rhs: float


def cell_average_bounds(params, far, e0, mass0, form="phi_consistent"):
    """Intervals for window averages of v and theta.

    Uses the roots of the combined equation when they exist, otherwise
    the sublevel sets {Phi <= rhs} and {Psi <= rhs}.  A side whose set
    is empty gets ``None``.
    """
    bounds = alpha_roots(params, far, e0, mass0, form)
    if not bounds.empty:
        iv = (bounds.alpha1, bounds.alpha2)
        return AverageBounds(iv, iv, "combined", bounds.rhs)
    rhs = bounds.rhs
    v_int = sublevel_interval(lambda y: float(phi(params, far, y)), rhs, params.v_min,
                              4 * far.v_bar,
                              dfunc=lambda y: float(phi_prime(params, far, y)))
    t_int = sublevel_interval(lambda y: float(psi(far, y)), rhs, 0.0,
                              4 * far.theta_bar,
                              dfunc=lambda y: 1.0 / far.theta_bar - 1.0 / y)
    return AverageBounds(v_int, t_int, "per_term", rhs)


def cell_average_check(params, far, state, bounds):
    """Unit-window averages of v and theta against the bound intervals.

    ``bounds`` is an :class:`AverageBounds` (or the ``CellAverageBounds``
    of :func:`nsacvdw.energy.alpha_roots`, treated as the combined form).
    """
    if hasattr(bounds, "alpha1"):
        if bounds.empty:
            raise ValueError("empty CellAverageBounds; use cell_average_bounds")
        iv = (bounds.alpha1, bounds.alpha2)
        bounds = AverageBounds(iv, iv, "combined", bounds.rhs)
    edges = _unit_edges(state.grid)
    if edges.size < 3:
        raise PreconditionFailed("domain must hold at least two unit windows")
    x = state.grid.x
    details = dict(t=state.t, form=bounds.form, windows=int(edges.size - 1))
    worst = math.inf
    ok = True
    for name, f, interval in (("v", state.v, bounds.v_interval),
                              ("theta", state.theta, bounds.theta_interval)):
        if interval is None:
            details[f"{name}_interval"] = None
            ok = False
            worst = min(worst, -math.inf)
            continue
        lo, hi = interval
        tol = 1e-6 * (hi - lo)
        avg = window_averages(x, f, edges)
        margin = np.minimum(avg - (lo - tol), (hi + tol) - avg)
        k = int(np.argmin(margin))
        details[f"{name}_interval"] = [lo, hi]
        details[f"{name}_worst_window"] = float(edges[k])
        details[f"{name}_worst_average"] = float(avg[k])
        worst = min(worst, float(margin[k]))
        ok = ok and bool(np.all(margin >= 0))
    return CheckResult("cell_averages", ok, worst, details)


# -- Kazhikhov reconstruction ---------------------------------------------


@dataclass
class KazhikhovTrace:
    anchor_index: np.ndarray
    d_field: np.ndarray
    y_value: np.ndarray
    accum: np.ndarray
    v_reconstructed: np.ndarray
    rel_err: float


def _effective_pressure(params, state):
    v = state.v
    chi_x = central(state.chi, state.grid.dx)
    p = -params.a / v**2 + params.R * state.theta / (v - params.b)
    return p + 0.5 * params.epsilon * chi_x**2 / v**2


def kazhikhov_reconstruction(params, far, snapshots, series=None, dt=None,
                             threshold=KAZHIKHOV_THRESHOLD):
    """Rebuild v from D, Y and the time integral along particle paths.

    For x in the unit window starting at the anchor node n,

        v = D(x,t) Y(t) (1 + int_0^t F / (D Y) dtau),
        D = v0(x) exp(int_n^x (u - u0) dy),
        Y = v(n,t)/v0(n) exp(-int_0^t P(n,s) ds),

    with P the pressure plus the capillary stress and F = v P.  The time
    integral is accumulated with exponential fitting: writing the
    integrand as h e^G with G = int_0^t P(n,s) ds, each interval
    contributes mean(h) e^{G_k} (e^{dG} - 1)/dG * dt, which is exact on
    constant states.  Nodes left of the first integer coordinate use the
    first anchor.

    Raises InsufficientCadence when snapshots are more than 10 steps apart.
    """
    if len(snapshots) < 2:
        raise InsufficientCadence("need at least two snapshots")
    times = np.array([s.t for s in snapshots])
    if dt is None:
        if series is None or len(series) < 1:
            raise InsufficientCadence("time step unknown: pass dt or the series")
        st = np.asarray(series["t"], dtype=float)
        dt = float(st[0]) if st.size == 1 else float(np.median(np.diff(st)))
    gaps = np.diff(times)
    if np.any(gaps > 10 * dt * (1 + 1e-9)):
        raise InsufficientCadence(
            f"snapshot spacing {gaps.max()!r} exceeds 10 time steps of {dt!r}"
        )
    first = snapshots[0]
    grid = first.grid
    x, dx = grid.x, grid.dx
    edges = _unit_edges(grid)
    anchors_x = edges if edges.size else np.array([grid.x_min])
    # anchor node: first node at or right of each integer coordinate
    anchor_nodes = np.searchsorted(x, anchors_x - 1e-12 * dx)
    anchor_nodes = np.unique(np.clip(anchor_nodes, 0, grid.n - 1))
    owner = np.searchsorted(anchor_nodes, np.arange(grid.n), side="right") - 1
    owner = np.clip(owner, 0, None)
    anchor_of = anchor_nodes[owner]

    v0 = first.v
    u0 = first.u
    z = np.ones(grid.n)  # e^{-G} (1 + accum)
    g_total = np.zeros(grid.n)
    p_prev = _effective_pressure(params, first)
    h_prev = p_prev.copy()  # h = F v0(n) / (D v(n)) reduces to P at t = 0
    worst = 0.0
    worst_t = first.t
    trace = None
    np_err = np.seterr(over="ignore")
    for k in range(1, len(snapshots)):
        s = snapshots[k]
        tau = s.t - snapshots[k - 1].t
        p_now = _effective_pressure(params, s)
        # D: cumulative trapezoid of u - u0 from each anchor
        cum = np.concatenate(([0.0], np.cumsum(0.5 * dx * ((s.u - u0)[1:] + (s.u - u0)[:-1]))))
        d_field = v0 * np.exp(cum - cum[anchor_of])
        ratio = s.v[anchor_of] / v0[anchor_of]
        h_now = s.v * p_now / d_field / ratio
        dg = 0.5 * tau * (p_prev + p_now)[anchor_of]
        with np.errstate(invalid="ignore", divide="ignore"):
            weight = np.where(np.abs(dg) > 1e-12, -np.expm1(-dg) / dg, 1.0 - 0.5 * dg)
        z = np.exp(-dg) * z + 0.5 * (h_prev + h_now) * tau * weight
        g_total = g_total + dg
        v_rec = d_field * ratio * z
        rel = np.abs(v_rec - s.v) / s.v
        if rel.max() > worst or trace is None:
            worst = float(rel.max())
            worst_t = s.t
        trace = KazhikhovTrace(
            anchor_index=anchor_nodes,
            d_field=d_field,
            y_value=s.v[anchor_nodes] / v0[anchor_nodes] * np.exp(-g_total[anchor_nodes]),
            accum=np.exp(g_total) * z - 1.0,
            v_reconstructed=v_rec,
            rel_err=float(rel.max()),
        )
        p_prev, h_prev = p_now, h_now
    np.seterr(**np_err)
    result = CheckResult(
        "kazhikhov", worst < threshold, threshold - worst,
        dict(max_rel_err=worst, at_time=worst_t, threshold=threshold,
             anchors=len(anchor_nodes), snapshots=len(snapshots)),
    )
    return result, trace


# -- truncation, NS monitors, Sobolev --------------------------------------


def truncation_norms(far, state, p_list):
    """Discrete L^{p+1} norms of (1/theta - 2 theta_bar)_+ and its sup.

    Returns ``(norms, sup)`` with ``norms[i]`` the norm for ``p_list[i]``.
    """
    th = state.theta
    if np.any(~(th > 0)):
        raise DomainError("temperature must be positive")
    f = np.maximum(1.0 / th - 2.0 * far.theta_bar, 0.0)
    w = state.grid.weights
    norms = np.array([float(np.dot(w, f ** (p + 1)) ** (1.0 / (p + 1))) for p in p_list])
    return norms, float(f.max())


def truncation_slack(far, state, p_list):
    """Hoelder factors bounding how far the norms may fall as p grows.

    With m the discrete measure of {f > 0}, norm_p <= m^(1/(p+1) - 1/(q+1))
    norm_q for p < q.  The factor is <= 1, giving plain monotonicity,
    whenever m <= 1.
    """
    th = state.theta
    f = np.maximum(1.0 / th - 2.0 * far.theta_bar, 0.0)
    m = float(np.dot(state.grid.weights, f > 0))
    e = 1.0 / (np.asarray(p_list, dtype=float) + 1.0)
    return m ** (e[:-1] - e[1:]) if m > 0 else np.ones(len(p_list) - 1), m


def truncation_check(far, snapshots, p_list):
    """Norm ladder of the truncated inverse temperature at every snapshot.

    Passes when norm_p <= slack * norm_q for consecutive p < q and the
    sup bounds the largest norm once rescaled by the support measure.
    """
    p_list = sorted(p_list)
    worst, worst_t, norms, sup, m = math.inf, None, None, 0.0, 0.0
    for s in snapshots:
        norms, sup = truncation_norms(far, s, p_list)
        slack, m = truncation_slack(far, s, p_list)
        scale = max(1.0, sup)
        margin = slack * norms[1:] - norms[:-1] + 1e-12 * scale
        if margin.size and margin.min() < worst:
            worst, worst_t = float(margin.min()), s.t
    worst = 0.0 if worst == math.inf else worst
    return CheckResult("truncation", worst >= 0, worst,
                       dict(worst_t=worst_t, final_norms=norms, final_sup=sup,
                            support_measure=m, p=p_list))


def ns_monitors(state, far):
    """``(M_v, tilde_V)``: 1 + max v and the dissipation-type functional plus 1."""
    return ns_monitor_values(far, state)


def ns_monitor_check(series, t_end, e0, kappa_tilde=1.0, mv_cap=None):
    """Bounded M_v and finite time integral of tilde_V over the run.

    The integral is compared with T (E0 + 1) + max(1, 1/kappa_tilde) E0,
    which the energy identity implies for the three integrands.
    """
    t = np.asarray(series["t"], dtype=float)
    dt = np.diff(np.concatenate(([0.0], t)))
    integral = float(np.sum(series["tilde_V"] * dt))
    cap = t_end * (e0 + 1.0) + max(1.0, 1.0 / kappa_tilde) * e0
    mv = float(np.max(series["M_v"]))
    finite = bool(np.all(np.isfinite(series["tilde_V"])) and np.isfinite(mv))
    ok = finite and integral <= cap and (mv_cap is None or mv <= mv_cap)
    return CheckResult(
        "ns_monitors", ok, cap - integral,
        dict(int_tilde_v=integral, int_cap=cap, max_m_v=mv, min_theta=float(np.min(series["min_theta"]))),
    )


def sobolev_sup_check(state, decay_tol=1e-8):
    """sup f^2 <= 2 ||f|| ||f_x|| + 10 dx (||f|| ||f_x|| + 1) for f = chi_x / v.

    ``f`` lives on cell faces.  Raises PreconditionFailed unless f is
    below ``decay_tol`` on both boundary faces.
    """
    dx = state.grid.dx
    f = face_grad(state.chi, dx) / face_mean(state.v)
    if abs(f[0]) >= decay_tol or abs(f[-1]) >= decay_tol:
        raise PreconditionFailed(
            f"chi_x/v does not decay at the boundary ({f[0]!r}, {f[-1]!r})"
        )
    wf = np.full(f.size, dx)
    wf[0] = wf[-1] = 0.5 * dx
    norm_f = math.sqrt(float(np.dot(wf, f * f)))
    norm_fx = math.sqrt(float(dx * np.sum(np.diff(f) ** 2 / dx**2)))
    lhs = float(np.max(f * f))
    rhs = 2 * norm_f * norm_fx
    tol = 10 * dx * (norm_f * norm_fx + 1)
    margin = rhs + tol - lhs
    return CheckResult("sobolev_sup", margin >= 0, margin,
                       dict(sup_f2=lhs, two_norm_product=rhs, tol_disc=tol, t=state.t,
                            note="uses sup f^2 <= 2|f||f_x|, with no square root"))
