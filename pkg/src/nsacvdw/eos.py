"""
Van der Waals thermodynamics with a volume cutoff.

The pressure law is

    p(v, theta) = -a / v**2 + R * theta / (v - b)     for v > b + h

and is undefined (infinite) below the cutoff ``b + h``.  Every public
function here accepts scalars or numpy arrays and raises
:class:`~nsacvdw.errors.DomainError` instead of returning infinities.

Subcritical isotherms (``theta < theta_c``) carry two spinodal volumes
``v_alpha < v_beta`` bounding the interval where p increases with v, and
two coexistence volumes ``v_star < v_alpha``, ``v_sup > v_beta`` fixed by
the equal-area rule.
"""

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .errors import CutoffConflict, DomainError, NoPositiveEquilibrium, NoSpinodal

__all__ = [
    "VdwParams",
    "CriticalPoint",
    "IsothermAnalysis",
    "Region",
    "pressure",
    "pressure_derivatives",
    "pressure_dvv",
    "internal_energy",
    "conductivity",
    "critical_point",
    "spinodal",
    "maxwell_construction",
    "equal_area_residual",
    "classify_state",
    "admissible_far_field",
]

_RTOL = 4 * np.finfo(float).eps


@dataclass(frozen=True)
class VdwParams:
    """Physical constants of the fluid and of the phase-field model.

    ``h`` defaults to ``0.05 * b``.  ``kappa_tilde`` and ``beta`` define the
    conductivity law ``kappa(theta) = kappa_tilde * theta**beta``.
    """

    a: float = 3.0
    b: float = 1.0 / 3.0
    R: float = 8.0 / 3.0
    h: float = None
    epsilon: float = 0.1
    kappa_tilde: float = 1.0
    beta: float = 0.5
    c_v: float = 1.0
    e_int0: float = 0.0

    def __post_init__(self):
        if self.h is None:
            object.__setattr__(self, "h", 0.05 * self.b)
        for name in ("a", "b", "R", "h", "epsilon", "kappa_tilde", "c_v"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise DomainError(f"{name} must be positive, got {value!r}")
        if not (np.isfinite(self.beta) and self.beta >= 0):
            raise DomainError(f"beta must be >= 0, got {self.beta!r}")

    @property
    def v_min(self):
        """Lower end (excluded) of the admissible volume domain."""
        return self.b + self.h

    def replace(self, **changes):
        values = {f: getattr(self, f) for f in self.__dataclass_fields__}
        values.update(changes)
        return VdwParams(**values)


@dataclass(frozen=True)
class CriticalPoint:
    theta_c: float
    v_c: float
    p_c: float


@dataclass(frozen=True)
class IsothermAnalysis:
    theta: float
    v_alpha: float
    v_beta: float
    v_star: float
    v_sup: float
    p_eq: float


class Region(enum.Enum):
    FORBIDDEN = "Forbidden"
    STABLE = "Stable"
    METASTABLE = "Metastable"
    UNSTABLE = "Unstable"


def _check_volume(params, v):
    v = np.asarray(v, dtype=float)
    if np.any(~(v > params.v_min)):
        raise DomainError(f"specific volume must exceed b + h = {params.v_min!r}")
    return v


def _check_temperature(theta):
    theta = np.asarray(theta, dtype=float)
    if np.any(~(theta > 0)):
        raise DomainError("temperature must be positive")
    return theta


def _out(x):
    return float(x) if np.ndim(x) == 0 else x


def pressure(params, v, theta):
    """Pressure on the admissible branch ``v > b + h``."""
    v = _check_volume(params, v)
    theta = _check_temperature(theta)
    return _out(-params.a / v**2 + params.R * theta / (v - params.b))


def pressure_derivatives(params, v, theta):
    """Return ``(dp/dv, dp/dtheta)``."""
    v = _check_volume(params, v)
    theta = _check_temperature(theta)
    dp_dv = 2 * params.a / v**3 - params.R * theta / (v - params.b) ** 2
    dp_dtheta = params.R / (v - params.b) * np.ones_like(theta)
    return _out(dp_dv), _out(dp_dtheta)


def pressure_dvv(params, v, theta):
    """Second volume derivative of the pressure."""
    v = _check_volume(params, v)
    theta = _check_temperature(theta)
    return _out(-6 * params.a / v**4 + 2 * params.R * theta / (v - params.b) ** 3)


def internal_energy(params, v, theta):
    v = _check_volume(params, v)
    theta = _check_temperature(theta)
    return _out(params.c_v * theta - params.a / v + params.e_int0)


def conductivity(params, theta):
    theta = _check_temperature(theta)
    return _out(params.kappa_tilde * theta**params.beta)


def critical_point(params):
    a, b, R = params.a, params.b, params.R
    return CriticalPoint(theta_c=8 * a / (27 * R * b), v_c=3 * b, p_c=a / (27 * b**2))


def _spinodal_roots(params, theta):
    """Both roots of dp/dv = 0 above v = b, ignoring the cutoff."""
    a, b, R = params.a, params.b, params.R
    if theta >= critical_point(params).theta_c:
        raise NoSpinodal(f"theta={theta!r} is not below the critical temperature")
    # 2a (v - b)^2 = R theta v^3, written as a cubic in v
    coeffs = [R * theta, -2 * a, 4 * a * b, -2 * a * b**2]
    roots = np.roots(coeffs)
    real = np.sort(roots[np.abs(roots.imag) <= 1e-7 * np.abs(roots)].real)
    real = real[real > b]
    if real.size != 2:
        raise NoSpinodal(f"theta={theta!r}: isotherm is numerically monotone")

    def f(v):
        return 2 * a * (v - b) ** 2 - R * theta * v**3

    def df(v):
        return 4 * a * (v - b) - 3 * R * theta * v**2

    polished = []
    for v in real:
        for _ in range(3):
            d = df(v)
            if d == 0:
                break
            step = f(v) / d
            # Newton steps near the double root at theta_c can jump to the other branch
            if abs(step) > 0.25 * abs(real[1] - real[0]):
                break
            v = v - step
        polished.append(v)
    return float(polished[0]), float(polished[1])


def spinodal(params, theta):
    """Return ``(v_alpha, v_beta)``, the local minimum and maximum of p."""
    v_alpha, v_beta = _spinodal_roots(params, theta)
    if v_alpha <= params.v_min:
        raise CutoffConflict(
            f"v_alpha={v_alpha!r} lies below the cutoff b + h = {params.v_min!r}"
        )
    return v_alpha, v_beta


def _raw_pressure(params, v, theta):
    return -params.a / v**2 + params.R * theta / (v - params.b)


def equal_area_residual(params, theta, v_star, v_sup, p_eq):
    """Closed-form value of the integral of (p - p_eq) over [v_star, v_sup]."""
    a, b, R = params.a, params.b, params.R
    return (
        R * theta * math.log((v_sup - b) / (v_star - b))
        + a / v_sup
        - a / v_star
        - p_eq * (v_sup - v_star)
    )


def _coexistence(params, theta, v_alpha, v_beta, *, v_floor):
    """Solve the equal-area rule by nested bracketed root finding.

    ``v_floor`` is the lower end of the liquid-root bracket.
    """
    p_alpha = _raw_pressure(params, v_alpha, theta)
    p_beta = _raw_pressure(params, v_beta, theta)

    def liquid(p):
        lo = v_floor * (1 + 1e-15) if v_floor == params.b else v_floor
        if _raw_pressure(params, lo, theta) <= p:
            raise CutoffConflict(
                f"no liquid root of p={p!r} above v={v_floor!r} at theta={theta!r}"
            )
        if p <= p_alpha:
            return v_alpha
        return brentq(
            lambda v: _raw_pressure(params, v, theta) - p, lo, v_alpha,
            xtol=1e-300, rtol=_RTOL, maxiter=500,
        )

    def vapour(p):
        if p >= p_beta:
            return v_beta
        hi = 2 * v_beta
        while _raw_pressure(params, hi, theta) > p:
            hi *= 2
            if hi > 1e300:
                raise NoPositiveEquilibrium(f"no vapour root for p={p!r}")
        return brentq(
            lambda v: _raw_pressure(params, v, theta) - p, v_beta, hi,
            xtol=1e-300, rtol=_RTOL, maxiter=500,
        )

    def area(p):
        return equal_area_residual(params, theta, liquid(p), vapour(p), p)

    # p(v_beta) = a (v_beta - 2b) / v_beta^3 > 0 since v_beta > 3b, and the
    # equal-area residual diverges to +inf as p -> 0+, so the root is positive
    if p_beta <= 0:
        raise NoPositiveEquilibrium(
            f"p(v_beta)={p_beta!r} <= 0 at theta={theta!r}: empty pressure bracket"
        )
    p_lo = max(p_alpha, 1e-14 * p_beta)
    a_lo = area(p_lo)
    if a_lo <= 0:
        raise NoPositiveEquilibrium(
            f"equal-area pressure at theta={theta!r} is not positive"
        )
    p_eq = brentq(area, p_lo, p_beta, xtol=1e-300, rtol=_RTOL, maxiter=500)
    return liquid(p_eq), vapour(p_eq), p_eq


def maxwell_construction(params, theta):
    """Coexistence volumes and equilibrium pressure of a subcritical isotherm.

    Raises
    ------
    NoSpinodal
        If ``theta >= theta_c``.
    NoPositiveEquilibrium
        If the admissible pressure bracket ``(max(0, p(v_alpha)), p(v_beta))``
        contains no equal-area pressure.
    CutoffConflict
        If the cutoff hides the spinodal or the liquid coexistence volume.
    """
    v_alpha, v_beta = spinodal(params, theta)
    v_star, v_sup, p_eq = _coexistence(
        params, theta, v_alpha, v_beta, v_floor=params.v_min
    )
    return IsothermAnalysis(
        theta=float(theta), v_alpha=v_alpha, v_beta=v_beta,
        v_star=v_star, v_sup=v_sup, p_eq=p_eq,
    )


def _thresholds(params, theta):
    """(v_star, v_alpha, v_beta, v_sup) used for classification.

    When the cutoff hides the liquid coexistence volume the classical
    construction on (b, inf) is used with v_star clipped to b + h.
    """
    v_alpha, v_beta = _spinodal_roots(params, theta)
    if v_alpha <= params.v_min:
        # the whole lower branch is hidden: nothing stable below v_beta
        return params.v_min, params.v_min, v_beta, v_beta
    try:
        v_star, v_sup, _ = _coexistence(
            params, theta, v_alpha, v_beta, v_floor=params.v_min
        )
    except CutoffConflict:
        _, v_sup, _ = _coexistence(
            params, theta, v_alpha, v_beta, v_floor=params.b
        )
        v_star = params.v_min
    return v_star, v_alpha, v_beta, v_sup


def classify_state(params, v, theta):
    """Region of ``(v, theta)``.

    Boundary volumes v_star, v_alpha, v_beta and v_sup are Metastable.  For
    ``theta >= theta_c`` every admissible volume is Stable.
    """
    v = float(v)
    theta = float(theta)
    if not v > params.v_min:
        return Region.FORBIDDEN
    if not theta > 0:
        raise DomainError("temperature must be positive")
    if theta >= critical_point(params).theta_c:
        return Region.STABLE
    v_star, v_alpha, v_beta, v_sup = _thresholds(params, theta)
    if v_alpha < v < v_beta:
        return Region.UNSTABLE
    if v_star <= v <= v_sup:
        return Region.METASTABLE
    return Region.STABLE


def admissible_far_field(params, v_bar, theta_bar):
    """Whether ``(v_bar, theta_bar)`` may serve as the far-field state."""
    if not (theta_bar > 0 and v_bar > params.v_min):
        return False
    if theta_bar >= critical_point(params).theta_c:
        return True
    try:
        v_star, _, _, v_sup = _thresholds(params, theta_bar)
    except NoSpinodal:
        return True
    return bool(v_bar < v_star or v_bar > v_sup)
