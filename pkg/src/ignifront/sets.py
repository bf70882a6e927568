"""Source-set descriptors: balls, half-spaces, convex polygons, raster masks.

These parameterize initial data (the region where u starts near 1) and the
seed sets of the effective reachability dynamics.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from ignifront.errors import ConfigurationError
from ignifront.grids import Grid


@dataclass(frozen=True)
class Ball:
    center: tuple
    radius: float

    def __post_init__(self):
        if self.radius <= 0:
            raise ConfigurationError("ball radius must be positive")
        object.__setattr__(self, "center", tuple(float(c) for c in np.atleast_1d(self.center)))

    @property
    def dim(self):
        return len(self.center)

    def signed_distance(self, pts):
        pts = np.asarray(pts, dtype=np.float64)
        d = np.sqrt(((pts - np.asarray(self.center)) ** 2).sum(axis=-1))
        return d - self.radius

    def support(self, e):
        e = np.asarray(e, dtype=np.float64)
        return float(np.dot(self.center, e)) + self.radius

    def bounded(self):
        return True

    def describe(self):
        return {"kind": "ball", "center_len": list(self.center),
                "radius_len": self.radius}


@dataclass(frozen=True)
class Halfspace:
    """H = {x : x.e <= offset} with unit normal e."""

    e: tuple
    offset: float = 0.0

    def __post_init__(self):
        e = np.asarray(self.e, dtype=np.float64)
        n = float(np.sqrt((e * e).sum()))
        if n == 0:
            raise ConfigurationError("half-space normal must be nonzero")
        object.__setattr__(self, "e", tuple(e / n))

    @property
    def dim(self):
        return len(self.e)

    def signed_distance(self, pts):
        pts = np.asarray(pts, dtype=np.float64)
        return pts @ np.asarray(self.e) - self.offset

    def support(self, e):
        raise ConfigurationError("half-spaces have no finite support function")

    def bounded(self):
        return False

    def describe(self):
        return {"kind": "halfspace", "e": list(self.e), "offset_len": self.offset}


@dataclass(frozen=True)
class ConvexPolygon:
    """Convex polygon in 2D given by its vertices (any order; hull is taken)."""

    vertices: tuple

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=np.float64)
        if v.ndim != 2 or v.shape[1] != 2 or len(v) < 3:
            raise ConfigurationError("polygon needs >= 3 planar vertices")
        hull = _convex_hull(v)
        object.__setattr__(self, "vertices", tuple(map(tuple, hull)))

    @property
    def dim(self):
        return 2

    def _edges(self):
        v = np.asarray(self.vertices)
        nxt = np.roll(v, -1, axis=0)
        return v, nxt

    def signed_distance(self, pts):
        """Exact signed Euclidean distance (negative inside)."""
        pts = np.atleast_2d(np.asarray(pts, dtype=np.float64))
        v, nxt = self._edges()
        edge = nxt - v
        elen2 = (edge ** 2).sum(axis=1)
        # distance to each segment
        dmin = np.full(len(pts), np.inf)
        inside = np.ones(len(pts), dtype=bool)
        for i in range(len(v)):
            w = pts - v[i]
            t = np.clip((w @ edge[i]) / elen2[i], 0.0, 1.0)
            proj = v[i] + t[:, None] * edge[i]
            dmin = np.minimum(dmin, np.sqrt(((pts - proj) ** 2).sum(axis=1)))
            cross = edge[i, 0] * w[:, 1] - edge[i, 1] * w[:, 0]
            inside &= cross >= 0
        return np.where(inside, -dmin, dmin)

    def support(self, e):
        v = np.asarray(self.vertices)
        return float((v @ np.asarray(e, dtype=np.float64)).max())

    def bounded(self):
        return True

    def describe(self):
        return {"kind": "polygon", "vertices_len": [list(v) for v in self.vertices]}


@dataclass(frozen=True)
class MaskSet:
    """Raster mask on its own grid; distances from the EDT of the mask."""

    grid: Grid
    mask: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.mask, dtype=bool)
        if m.shape != self.grid.shape:
            raise ConfigurationError("mask shape does not match its grid")
        object.__setattr__(self, "mask", m)

    @property
    def dim(self):
        return self.grid.dim

    def signed_distance(self, pts):
        # distance sampled from the EDT of the raster, nearest-index lookup
        out = ndimage.distance_transform_edt(~self.mask, sampling=self.grid.h)
        inn = ndimage.distance_transform_edt(self.mask, sampling=self.grid.h)
        sd = np.where(self.mask, -inn, out)
        pts = np.atleast_2d(np.asarray(pts, dtype=np.float64))
        idx = np.rint((pts - np.asarray(self.grid.origin)) / self.grid.h).astype(int)
        idx = np.clip(idx, 0, np.asarray(self.grid.shape) - 1)
        return sd[tuple(idx.T)]

    def support(self, e):
        pts = self.grid.points()[self.mask.ravel()]
        return float((pts @ np.asarray(e, dtype=np.float64)).max())

    def bounded(self):
        return True

    def describe(self):
        return {"kind": "mask", "shape": list(self.grid.shape),
                "h_len": self.grid.h, "origin_len": list(self.grid.origin)}


def indicator_on_grid(source, grid: Grid, inflate: float = 0.0) -> np.ndarray:
    """Boolean indicator of the set inflated by ``inflate`` on a grid."""
    pts = grid.points()
    sd = source.signed_distance(pts)
    return (np.asarray(sd) <= inflate).reshape(grid.shape)


def _convex_hull(points: np.ndarray) -> np.ndarray:
    """Andrew monotone chain; returns CCW hull vertices."""
    pts = sorted(map(tuple, points))
    if len(pts) <= 2:
        return np.asarray(pts)

    def half(seq):
        out = []
        for p in seq:
            while len(out) >= 2 and _cross(out[-2], out[-1], p) <= 0:
                out.pop()
            out.append(p)
        return out

    lower = half(pts)
    upper = half(reversed(pts))
    return np.asarray(lower[:-1] + upper[:-1])


def _cross(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
