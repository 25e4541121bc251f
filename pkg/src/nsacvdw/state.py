"""Grid, far-field and state containers shared by every module."""

from dataclasses import dataclass, field, replace

import numpy as np

__all__ = ["Grid1D", "FarField", "State"]


@dataclass(frozen=True)
class Grid1D:
    """Uniform Lagrangian grid with ``n`` nodes on ``[x_min, x_max]``."""

    x_min: float
    x_max: float
    n: int

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 16:
            raise ValueError(f"grid needs at least 16 nodes, got {self.n!r}")
        if not self.x_max > self.x_min:
            raise ValueError("x_max must exceed x_min")

    @property
    def dx(self):
        return (self.x_max - self.x_min) / (self.n - 1)

    @property
    def x(self):
        return self.x_min + np.arange(self.n) * self.dx

    @property
    def weights(self):
        """Composite trapezoid weights."""
        w = np.full(self.n, self.dx)
        w[0] = w[-1] = 0.5 * self.dx
        return w


@dataclass(frozen=True)
class FarField:
    """Limits of (v, u, theta, chi) as x -> -inf / +inf."""

    v_bar: float
    theta_bar: float
    chi_left: float = -1.0
    chi_right: float = 1.0


@dataclass
class State:
    """Nodal fields at time ``t``."""

    grid: Grid1D
    t: float
    v: np.ndarray
    u: np.ndarray
    theta: np.ndarray
    chi: np.ndarray

    def __post_init__(self):
        for name in ("v", "u", "theta", "chi"):
            arr = np.array(getattr(self, name), dtype=float)
            if arr.shape != (self.grid.n,):
                raise ValueError(f"{name} must have shape ({self.grid.n},)")
            setattr(self, name, arr)

    def copy(self):
        return State(self.grid, self.t, self.v.copy(), self.u.copy(),
                     self.theta.copy(), self.chi.copy())

    def with_fields(self, **changes):
        return replace(self, **changes)

    def fields(self):
        return np.stack([self.v, self.u, self.theta, self.chi])
