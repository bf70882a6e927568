"""Uniform grids and oblique frames."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ignifront.errors import ConfigurationError


@dataclass(frozen=True)
class Grid:
    """Uniform grid: point (i_1,...,i_d) sits at origin + h*(i_1,...,i_d)."""

    origin: tuple
    shape: tuple
    h: float

    def __post_init__(self):
        if len(self.origin) != len(self.shape):
            raise ConfigurationError("origin and shape dimension mismatch")
        if self.h <= 0:
            raise ConfigurationError("grid spacing must be positive")
        object.__setattr__(self, "origin", tuple(float(o) for o in self.origin))
        object.__setattr__(self, "shape", tuple(int(n) for n in self.shape))

    @property
    def dim(self) -> int:
        return len(self.shape)

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    def axis(self, j: int) -> np.ndarray:
        return self.origin[j] + self.h * np.arange(self.shape[j])

    def axes(self):
        return [self.axis(j) for j in range(self.dim)]

    def meshgrid(self):
        return np.meshgrid(*self.axes(), indexing="ij")

    def points(self) -> np.ndarray:
        """All grid points as an (N, d) array in C order."""
        mesh = self.meshgrid()
        return np.stack([m.ravel() for m in mesh], axis=-1)

    def index_of(self, x) -> tuple:
        """Nearest grid index of a physical point."""
        x = np.asarray(x, dtype=np.float64)
        idx = np.rint((x - np.asarray(self.origin)) / self.h).astype(int)
        if np.any(idx < 0) or np.any(idx >= np.asarray(self.shape)):
            raise ConfigurationError(f"point {x} outside grid")
        return tuple(int(i) for i in np.atleast_1d(idx))

    def refined(self, factor: int = 2) -> "Grid":
        shape = tuple((n - 1) * factor + 1 for n in self.shape)
        return Grid(self.origin, shape, self.h / factor)

    @classmethod
    def box(cls, lo, hi, h: float) -> "Grid":
        """Grid covering the box [lo, hi] with spacing h (hi rounded up)."""
        lo = np.atleast_1d(np.asarray(lo, dtype=np.float64))
        hi = np.atleast_1d(np.asarray(hi, dtype=np.float64))
        shape = tuple(int(np.ceil((b - a) / h)) + 1 for a, b in zip(lo, hi))
        return cls(tuple(lo), shape, h)


@dataclass(frozen=True)
class Frame:
    """Orthonormal 2D frame: physical x = anchor + y1*e + y2*w.

    Used to run half-space fronts along oblique rational directions on an
    axis-aligned computational grid; e is the propagation direction and w the
    transverse unit vector.
    """

    e: tuple
    anchor: tuple = (0.0, 0.0)

    def __post_init__(self):
        e = np.asarray(self.e, dtype=np.float64)
        n = float(np.hypot(*e))
        if n == 0:
            raise ConfigurationError("frame direction must be nonzero")
        object.__setattr__(self, "e", tuple(e / n))

    @property
    def w(self) -> tuple:
        return (-self.e[1], self.e[0])

    def basis(self) -> np.ndarray:
        return np.array([self.e, self.w], dtype=np.float64).T  # columns e, w

    def to_physical(self, y: np.ndarray) -> np.ndarray:
        y = np.atleast_2d(np.asarray(y, dtype=np.float64))
        return np.asarray(self.anchor) + y @ self.basis().T

    def to_frame(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        return (x - np.asarray(self.anchor)) @ self.basis()


def transverse_wrap_vector(direction) -> np.ndarray:
    """Integer lattice vector perpendicular to an integer direction (2D)."""
    a, b = (int(v) for v in direction)
    if a == 0 and b == 0:
        raise ConfigurationError("direction must be a nonzero integer vector")
    g = np.gcd(a, b) if (a or b) else 1
    return np.array([-b // g, a // g], dtype=np.int64)
