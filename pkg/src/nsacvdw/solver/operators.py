"""Second-order finite-difference stencils on the collocated grid.

Face quantities live on the ``n - 1`` cell faces between nodes; nodal
derivatives are returned with zeros on the two boundary nodes, where the
fields are pinned to far-field values.
"""

import numpy as np

from ..errors import BoundViolation

__all__ = [
    "face_mean",
    "face_grad",
    "central",
    "divergence",
    "chemical_potential",
]


def face_mean(f):
    return 0.5 * (f[:-1] + f[1:])


def face_grad(f, dx):
    return (f[1:] - f[:-1]) / dx


def central(f, dx):
    out = np.zeros_like(f)
    out[1:-1] = (f[2:] - f[:-2]) / (2 * dx)
    return out


def divergence(flux, dx):
    """Nodal divergence of a face flux; boundary entries are zero."""
    out = np.zeros(flux.size + 1)
    out[1:-1] = (flux[1:] - flux[:-1]) / dx
    return out


def chemical_potential(params, state):
    """mu = (chi^3 - chi)/eps - eps (chi_x / v)_x, zero on boundary nodes."""
    v, chi = state.v, state.chi
    if np.any(~(v > params.v_min)):
        i = int(np.argmin(v))
        raise BoundViolation(f"v[{i}]={v[i]!r} <= b + h")
    dx = state.grid.dx
    eps = params.epsilon
    flux = face_grad(chi, dx) / face_mean(v)
    mu = (chi**3 - chi) / eps - eps * divergence(flux, dx)
    mu[0] = mu[-1] = 0.0
    return mu
