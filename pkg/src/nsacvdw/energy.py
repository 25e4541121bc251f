"""
Relative-entropy functionals and the energy balance.

For a far field ``(v_bar, theta_bar)`` the volume and temperature
functionals are

    Phi(v)   = [p_bar (v - v_bar) - (a/v - a/v_bar) - R theta_bar ln((v-b)/(v_bar-b))] / theta_bar
    Psi(th)  = (th - theta_bar)/theta_bar - ln(th/theta_bar)

with ``Phi = +inf`` below the cutoff.  Together with the kinetic and
interfacial densities they make up a modified energy whose decay rate is
the dissipation ``V(t)``.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .eos import pressure
from .errors import BoundViolation, DomainError
from .solver.operators import chemical_potential, face_grad, face_mean
from .state import FarField

__all__ = [
    "FarField",
    "POSITIVE_INFINITY",
    "EnergyReport",
    "CellAverageBounds",
    "phi",
    "phi_prime",
    "psi",
    "energy_report",
    "algebraic_lhs",
    "alpha_roots",
    "sublevel_interval",
]

POSITIVE_INFINITY = math.inf
_RTOL = 4 * np.finfo(float).eps


def phi(params, far, v):
    """Volume functional; ``POSITIVE_INFINITY`` at or below ``b + h``."""
    a, b, R = params.a, params.b, params.R
    vb, tb = far.v_bar, far.theta_bar
    v = np.asarray(v, dtype=float)
    out = np.full(v.shape, POSITIVE_INFINITY)
    ok = v > params.v_min
    w = v[ok]
    p_bar = R * tb / (vb - b) - a / vb**2
    out[ok] = (
        p_bar * (w - vb) - (a / w - a / vb) - R * tb * np.log((w - b) / (vb - b))
    ) / tb
    return float(out) if out.ndim == 0 else out


def phi_prime(params, far, v):
    """Derivative of Phi on the admissible branch: (p_bar - p(v)) / theta_bar."""
    p_bar = pressure(params, far.v_bar, far.theta_bar)
    return (p_bar - pressure(params, v, far.theta_bar)) / far.theta_bar


def psi(far, theta):
    theta = np.asarray(theta, dtype=float)
    if np.any(~(theta > 0)):
        raise DomainError("temperature must be positive")
    r = theta / far.theta_bar
    out = (r - 1) - np.log(r)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class EnergyReport:
    e_kinetic: float
    e_interface: float
    e_phi: float
    e_psi: float
    e_total: float
    dissipation_v: float
    mass_integral: float
    e0: float


def _check_state(params, state):
    bad_v = np.flatnonzero(~(state.v > params.v_min))
    if bad_v.size:
        i = int(bad_v[0])
        raise BoundViolation(f"v[{i}]={state.v[i]!r} <= b + h")
    bad_t = np.flatnonzero(~(state.theta > 0))
    if bad_t.size:
        i = int(bad_t[0])
        raise BoundViolation(f"theta[{i}]={state.theta[i]!r} <= 0")


def energy_report(params, far, state, mu=None, e0=None):
    """Quadrature of every energy component and of the dissipation rate.

    Nodal integrands use the trapezoid rule; integrands containing a
    gradient are evaluated on cell faces with the midpoint rule, matching
    the compact stencils of the solver.  ``e0`` defaults to this state's
    total, i.e. the report of an initial state.
    """
    _check_state(params, state)
    if mu is None:
        mu = chemical_potential(params, state)
    grid = state.grid
    w, dx = grid.weights, grid.dx
    v, u, th, chi = state.v, state.u, state.theta, state.chi
    tb = far.theta_bar
    eps = params.epsilon

    vf = face_mean(v)
    thf = face_mean(th)
    chi_x = face_grad(chi, dx)
    u_x = face_grad(u, dx)
    th_x = face_grad(th, dx)

    e_kin = np.dot(w, u**2) / (2 * tb)
    bulk = np.dot(w, (chi**2 - 1) ** 2) / (4 * eps)
    grad = dx * np.sum(0.5 * eps * chi_x**2 / vf)
    e_w = (bulk + grad) / tb
    e_phi = np.dot(w, phi(params, far, v))
    e_psi = params.c_v * np.dot(w, psi(far, th))
    total = e_kin + e_w + e_phi + e_psi

    kappa_f = params.kappa_tilde * thf**params.beta
    diss = dx * np.sum(kappa_f * th_x**2 / (vf * thf**2) + u_x**2 / (vf * thf))
    diss += np.dot(w, v * mu**2 / th)
    mass = np.dot(w, v - far.v_bar)
    return EnergyReport(
        e_kinetic=float(e_kin),
        e_interface=float(e_w),
        e_phi=float(e_phi),
        e_psi=float(e_psi),
        e_total=float(total),
        dissipation_v=float(diss),
        mass_integral=float(mass),
        e0=float(total if e0 is None else e0),
    )


@dataclass(frozen=True)
class CellAverageBounds:
    alpha1: float
    alpha2: float
    rhs: float
    empty: bool


def algebraic_lhs(params, far, y, form="phi_consistent"):
    """Left side G(y) of the algebraic equation bounding cell averages.

    ``phi_consistent`` evaluates Phi(y) + Psi(y).
    ``as_printed`` keeps the literal coefficients: a first coefficient
    (R/(v_bar-b) - a/v_bar^2)/theta_bar and no a/y term.
    """
    y = np.asarray(y, dtype=float)
    out = np.full(y.shape, POSITIVE_INFINITY)
    ok = y > params.v_min
    yy = y[ok]
    vb, tb = far.v_bar, far.theta_bar
    a, b, R = params.a, params.b, params.R
    if form == "phi_consistent":
        out[ok] = phi(params, far, yy) + psi(far, yy)
    elif form == "as_printed":
        out[ok] = (
            (R / (vb - b) - a / vb**2) * (yy - vb) / tb
            - R * np.log((yy - b) / (vb - b))
            + (yy - tb) / tb
            - np.log(yy / tb)
        )
    else:
        raise ValueError(f"unknown algebraic equation form {form!r}")
    return float(out) if out.ndim == 0 else out


def sublevel_interval(func, rhs, lo, hi_start, dfunc=None, touch_tol=1e-12):
    """Hull ``[y1, y2]`` of ``{y > lo : func(y) <= rhs}``.

    ``func`` must be finite on ``(lo, inf)`` and grow without bound as
    ``y -> inf``; ``dfunc`` (its derivative) sharpens the minimiser.
    Returns ``None`` for an empty set.  A minimum exceeding ``rhs`` by at
    most ``touch_tol * (1 + |rhs|)`` counts as a double root.  When the
    set reaches the open end ``lo`` the lower end is reported as ``lo``.
    """
    hi = max(hi_start, 2 * lo)
    while func(hi) <= rhs:
        hi *= 2
        if hi > 1e12:
            raise DomainError("sublevel set is unbounded")
    # geometric spacing resolves the steep region near the open end
    ys = lo + (hi - lo) * np.geomspace(1e-12, 1.0, 4001)
    g = np.array([func(y) for y in ys])
    k = int(np.argmin(g))
    left, right = ys[max(k - 1, 0)], ys[min(k + 1, ys.size - 1)]
    y_min = None
    if dfunc is not None and dfunc(left) < 0 < dfunc(right):
        y_min = brentq(dfunc, left, right, xtol=1e-300, rtol=_RTOL)
    else:
        res = minimize_scalar(func, bounds=(left, right), method="bounded",
                              options={"xatol": 1e-14 * max(1.0, right)})
        y_min = res.x if res.fun < g[k] else ys[k]
    g_min = func(y_min)
    if g_min > rhs:
        if g_min - rhs <= touch_tol * (1 + abs(rhs)):
            return float(y_min), float(y_min)
        return None
    below = np.flatnonzero(g <= rhs)
    if below.size == 0:
        # only the refined minimiser dips below rhs
        y1 = brentq(lambda y: func(y) - rhs, left, y_min, xtol=1e-300, rtol=_RTOL)
        y2 = brentq(lambda y: func(y) - rhs, y_min, right, xtol=1e-300, rtol=_RTOL)
        return float(y1), float(y2)
    i0, i1 = below[0], below[-1]
    if i0 == 0:
        y1 = lo
    else:
        y1 = brentq(lambda y: func(y) - rhs, ys[i0 - 1], ys[i0], xtol=1e-300,
                    rtol=_RTOL)
    y2 = brentq(lambda y: func(y) - rhs, ys[i1], ys[i1 + 1], xtol=1e-300, rtol=_RTOL)
    return float(min(y1, y_min)), float(max(y2, y_min))


def _g_prime(params, far, y):
    tb = far.theta_bar
    p_bar = -params.a / far.v_bar**2 + params.R * tb / (far.v_bar - params.b)
    p_y = -params.a / y**2 + params.R * tb / (y - params.b)
    return (p_bar - p_y) / tb + 1 / tb - 1 / y


def alpha_roots(params, far, e0, mass0, form="phi_consistent"):
    """Roots alpha1 <= alpha2 of G(y) = e0 + a mass0 / (theta_bar v_bar (b+h))."""
    rhs = e0 + params.a * mass0 / (far.theta_bar * far.v_bar * params.v_min)
    interval = sublevel_interval(
        lambda y: float(algebraic_lhs(params, far, y, form)),
        rhs,
        params.v_min,
        4 * max(far.v_bar, far.theta_bar),
        dfunc=(lambda y: _g_prime(params, far, y)) if form == "phi_consistent" else None,
    )
    if interval is None:
        return CellAverageBounds(math.nan, math.nan, float(rhs), True)
    return CellAverageBounds(interval[0], interval[1], float(rhs), False)
