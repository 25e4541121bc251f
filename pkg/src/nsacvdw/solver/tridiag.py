"""Tridiagonal solves for the implicit diffusion substeps."""

import numpy as np
from scipy.linalg import solve_banded

from ..errors import SingularSystem

__all__ = ["solve_tridiagonal", "check_dominance"]


def check_dominance(lower, diag, upper):
    """Raise SingularSystem unless the matrix is diagonally dominant.

    Every row must satisfy |d_i| >= |l_i| + |u_i|, and each irreducible
    block (split where an off-diagonal coupling vanishes) must contain a
    strictly dominant row.  This covers strict dominance as well as the
    usual second-difference matrices.
    """
    n = diag.size
    off = np.zeros(n)
    off[1:] += np.abs(lower)
    off[:-1] += np.abs(upper)
    margin = np.abs(diag) - off
    if np.any(margin < 0) or not np.all(np.isfinite(margin)):
        i = int(np.argmin(np.where(np.isfinite(margin), margin, -np.inf)))
        raise SingularSystem(f"row {i} is not diagonally dominant")
    strict = margin > 0
    if strict.all():
        return
    # row i and i+1 are coupled when either off-diagonal entry is nonzero
    coupled = (lower != 0) | (upper != 0)
    starts = np.concatenate(([0], np.flatnonzero(~coupled) + 1))
    ends = np.concatenate((starts[1:], [n]))
    for s, e in zip(starts, ends):
        if not strict[s:e].any():
            raise SingularSystem(f"rows {s}..{e - 1} are only weakly dominant")


def solve_tridiagonal(lower, diag, upper, rhs, check=True):
    """Solve the tridiagonal system with sub-, main and super-diagonals.

    Parameters
    ----------
    lower, upper : array_like, shape (n - 1,)
    diag, rhs : array_like, shape (n,)
    check : bool
        Verify diagonal dominance first (see :func:`check_dominance`).

    Returns
    -------
    ndarray, shape (n,)
    """
    lower = np.asarray(lower, dtype=float)
    diag = np.asarray(diag, dtype=float)
    upper = np.asarray(upper, dtype=float)
    rhs = np.asarray(rhs, dtype=float)
    n = diag.size
    if lower.shape != (n - 1,) or upper.shape != (n - 1,) or rhs.shape != (n,):
        raise ValueError("inconsistent tridiagonal system shapes")
    if check:
        check_dominance(lower, diag, upper)
    if n == 1:
        return rhs / diag
    ab = np.empty((3, n))
    ab[0, 0] = 0.0
    ab[0, 1:] = upper
    ab[1] = diag
    ab[2, :-1] = lower
    ab[2, -1] = 0.0
    return solve_banded((1, 1), ab, rhs, check_finite=False)
