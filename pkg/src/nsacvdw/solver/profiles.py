"""Initial profiles for the Cauchy problem truncated to a finite grid."""

import numpy as np

from ..eos import admissible_far_field, critical_point, spinodal
from ..errors import AdmissibilityError, ProfileError
from ..state import State

__all__ = ["PROFILE_KINDS", "init_state"]

PROFILE_KINDS = ("constant", "tanh_interface", "elliptic_bump", "perturbation", "manufactured")


def _interface(x, width, center):
    return np.tanh((x - center) / width)


def _plateau(x, center, width, edge):
    """Smooth top-hat of unit height at ``center`` and mass ``width``."""
    half = 0.5 * width
    shape = 0.5 * (np.tanh((x - center + half) / edge) - np.tanh((x - center - half) / edge))
    return shape / np.tanh(half / edge)


def init_state(grid, far, profile, params=None):
    """Build the initial state described by ``profile``.

    Parameters
    ----------
    grid : Grid1D
    far : FarField
    profile : dict
        ``{"kind": ..., **options}``.  Options per kind:

        * ``constant``: none.  Gives ``v = v_bar, u = 0, theta = theta_bar``
          and ``chi = +1``.
        * ``tanh_interface``: ``width`` (default 0.5), ``center`` (default
          mid-domain).
        * ``elliptic_bump``: ``v_mid`` (default mid-spinodal), ``width``
          (default 2), ``edge`` (default 0.25), ``center``,
          ``interface_width`` (default 0.5).  A plateau of height ``v_mid``
          sits on the far-field volume, and chi carries a tanh interface.
        * ``perturbation``: Gaussian bumps ``g`` of half-width ``width``
          (default 0.5) at ``center``: ``v += dv g`` (0.05),
          ``u = du (x - center)/width g`` (0.02), ``theta += dtheta g``
          shifted by ``theta_shift`` (0.03, 0), ``chi = 1 - chi_dip g`` (0),
          or a tanh interface when ``interface_width`` is given.
        * ``manufactured``: ``k`` (default 1); the t = 0 slice of the
          manufactured solution, see :mod:`nsacvdw.solver.mms`.
    params : VdwParams
        Needed for the admissibility check and for ``elliptic_bump``.

    Raises
    ------
    AdmissibilityError
        If ``params`` is given and the far field is not admissible.
    ProfileError
        For unknown kinds, a supercritical ``elliptic_bump`` or a plateau
        height outside the spinodal interval.
    """
    profile = dict(profile)
    kind = profile.pop("kind", None)
    if kind not in PROFILE_KINDS:
        raise ProfileError(f"unknown profile kind {kind!r}")
    if kind == "manufactured":
        from .mms import manufactured_state

        return manufactured_state(grid, far, params, k=int(profile.pop("k", 1)), **profile)
    if params is not None and not admissible_far_field(params, far.v_bar, far.theta_bar):
        raise AdmissibilityError(
            f"far field (v_bar={far.v_bar!r}, theta_bar={far.theta_bar!r}) is not admissible"
        )
    x = grid.x
    n = grid.n
    mid = 0.5 * (grid.x_min + grid.x_max)
    v = np.full(n, float(far.v_bar))
    u = np.zeros(n)
    theta = np.full(n, float(far.theta_bar))
    chi = np.ones(n)

    if kind == "tanh_interface":
        chi = _tanh_chi(x, far, profile.pop("width", 0.5), profile.pop("center", mid))
    elif kind == "elliptic_bump":
        if params is None:
            raise ProfileError("elliptic_bump needs the fluid parameters")
        theta_c = critical_point(params).theta_c
        if far.theta_bar >= theta_c:
            raise ProfileError(
                f"elliptic_bump needs a subcritical temperature, got {far.theta_bar!r} >= {theta_c!r}"
            )
        v_alpha, v_beta = spinodal(params, far.theta_bar)
        v_mid = float(profile.pop("v_mid", 0.5 * (v_alpha + v_beta)))
        if not v_alpha < v_mid < v_beta:
            raise ProfileError(
                f"v_mid={v_mid!r} is outside the spinodal interval ({v_alpha!r}, {v_beta!r})"
            )
        center = profile.pop("center", mid)
        shape = _plateau(x, center, profile.pop("width", 2.0), profile.pop("edge", 0.25))
        v = far.v_bar + (v_mid - far.v_bar) * shape
        v[0] = v[-1] = far.v_bar
        chi = _tanh_chi(x, far, profile.pop("interface_width", 0.5), center)
    elif kind == "perturbation":
        center = profile.pop("center", mid)
        width = profile.pop("width", 0.5)
        if not width > 0:
            raise ProfileError("perturbation width must be positive")
        z = (x - center) / width
        g = np.exp(-z**2)
        g_th = np.exp(-(z - profile.pop("theta_shift", 0.0) / width) ** 2)
        v = v + profile.pop("dv", 0.05) * g
        u = profile.pop("du", 0.02) * z * g
        theta = theta + profile.pop("dtheta", 0.03) * g_th
        iw = profile.pop("interface_width", None)
        if iw is None:
            chi = 1.0 - profile.pop("chi_dip", 0.0) * g
        else:
            chi = _tanh_chi(x, far, iw, center)
        v[0], v[-1] = far.v_bar, far.v_bar
        u[0] = u[-1] = 0.0
        theta[0], theta[-1] = far.theta_bar, far.theta_bar
    if profile:
        raise ProfileError(f"unexpected options for {kind}: {sorted(profile)}")
    return State(grid, 0.0, v, u, theta, chi)


def _tanh_chi(x, far, width, center):
    if not width > 0:
        raise ProfileError("interface width must be positive")
    lo, hi = far.chi_left, far.chi_right
    chi = 0.5 * (lo + hi) + 0.5 * (hi - lo) * _interface(x, width, center)
    chi[0], chi[-1] = lo, hi
    return chi
