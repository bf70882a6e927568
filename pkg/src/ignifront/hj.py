"""Effective reachability dynamics: convex closed forms and level-set evolution.

For a convex seed set A and direction-resolved speeds c*, the reachable
region at time t is the intersection of half-spaces

    Theta_t = inter_e { x : x.e < h_A(e) + c*(e) t },

sampled over a dense set of directions with the speed interpolated in angle.
General open sets evolve by a first-order monotone upwind scheme for the
level-set equation v_t = c*(-grad v/|grad v|) |grad v|; the region is the
positive super-level set of v and is never advanced as a raw indicator.
The Wulff shape is the t = 1 region grown from the origin.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from ignifront.errors import ConfigurationError, IntegrationError
from ignifront.fieldio import ScalarField
from ignifront.grids import Grid
from ignifront.sets import Halfspace
from ignifront.speedtable import SpeedTable

DEFAULT_DIRECTIONS_2D = 720
LEVELSET_SAFETY = 0.5


@dataclass
class ReachabilitySet:
    """Region swept by the effective front at one time slice.

    Either a support-function representation (directions + offsets, exact for
    convex seeds) or a level-set field; both answer membership queries, and
    the support form also yields a polygon and exact erosions/dilations.
    """

    t: float
    speed: SpeedTable
    source: object = None
    directions: np.ndarray = None
    offsets: np.ndarray = None
    halfspace: tuple = None           # (e, offset) closed form
    level_field: ScalarField = None

    @property
    def kind(self) -> str:
        if self.level_field is not None:
            return "levelset"
        if self.halfspace is not None:
            return "halfspace"
        return "support"

    def contains(self, points) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
        if self.kind == "halfspace":
            e, off = self.halfspace
            return pts @ np.asarray(e) < off
        if self.kind == "support":
            return np.all(pts @ self.directions.T < self.offsets[None, :], axis=1)
        g = self.level_field.grid
        idx = np.rint((pts - np.asarray(g.origin)) / g.h).astype(int)
        ok = np.all((idx >= 0) & (idx < np.asarray(g.shape)), axis=1)
        out = np.zeros(len(pts), dtype=bool)
        inside = self.level_field.values > 0.0
        out[ok] = inside[tuple(idx[ok].T)]
        return out

    def mask_on(self, grid: Grid) -> np.ndarray:
        return self.contains(grid.points()).reshape(grid.shape)

    def eroded(self, delta: float) -> "ReachabilitySet":
        """Region shrunk by delta (exact for the support representation)."""
        if self.kind == "support":
            return ReachabilitySet(self.t, self.speed, self.source,
                                   self.directions, self.offsets - delta)
        if self.kind == "halfspace":
            e, off = self.halfspace
            return ReachabilitySet(self.t, self.speed, self.source,
                                   halfspace=(e, off - delta))
        return self._resigned(-delta)

    def inflated(self, delta: float) -> "ReachabilitySet":
        if self.kind in ("support", "halfspace"):
            return self.eroded(-delta)
        return self._resigned(delta)

    def _resigned(self, delta):
        g = self.level_field.grid
        inside = self.level_field.values > 0
        d_out = ndimage.distance_transform_edt(~inside, sampling=g.h)
        d_in = ndimage.distance_transform_edt(inside, sampling=g.h)
        sd = np.where(inside, d_in, -d_out)  # positive inside
        return ReachabilitySet(self.t, self.speed, self.source,
                               level_field=ScalarField(g, sd + delta, self.level_field.t))

    def polygon(self) -> np.ndarray:
        """Vertices of the region (2D support representation)."""
        if self.kind != "support" or self.directions.shape[1] != 2:
            raise ConfigurationError("polygon() needs a 2D support representation")
        return _clip_halfplanes(self.directions, self.offsets)

    def area(self) -> float:
        if self.kind == "levelset":
            return float((self.level_field.values > 0).sum()) * self.level_field.grid.h ** self.level_field.grid.dim
        poly = self.polygon()
        return _polygon_area(poly)

    def perimeter(self) -> float:
        poly = self.polygon()
        return float(np.sqrt(((poly - np.roll(poly, -1, axis=0)) ** 2).sum(axis=1)).sum())

    def support(self, e) -> float:
        if self.kind == "support":
            poly = self.polygon()
            return float((poly @ np.asarray(e, dtype=np.float64)).max())
        raise ConfigurationError("support() needs the support representation")


def _speed_samples(speed: SpeedTable, n_dirs: int):
    ang = np.linspace(0.0, 2.0 * np.pi, n_dirs, endpoint=False)
    cs = speed.c_of_angle(ang)
    dirs = np.stack([np.cos(ang), np.sin(ang)], axis=1)
    return dirs, cs


def theta_convex(source, speed: SpeedTable, t: float,
                 n_dirs: int = DEFAULT_DIRECTIONS_2D) -> ReachabilitySet:
    """Reachable region of a bounded convex seed at time t (closed form).

    Half-spaces get their own exact one-liner { x.e < offset + c*(e) t }.
    """
    if t < 0:
        raise ConfigurationError("time must be nonnegative")
    if isinstance(source, Halfspace):
        c = speed.c_of_direction(np.asarray(source.e)) if source.dim == 2 \
            else speed.c_star[0]
        return ReachabilitySet(t, speed, source,
                               halfspace=(tuple(source.e), source.offset + c * t))
    if not source.bounded():
        raise ConfigurationError("theta_convex needs a bounded convex seed")
    dim = source.dim
    if dim == 1:
        dirs = np.array([[1.0], [-1.0]])
        cs = np.array([speed.c_star[0], speed.c_star[-1]])
        offs = np.array([source.support(d) for d in dirs]) + cs * t
        return ReachabilitySet(t, speed, source, dirs, offs)
    if dim != 2:
        raise ConfigurationError("closed-form regions are 1D/2D")
    dirs, cs = _speed_samples(speed, n_dirs)
    h_a = np.array([source.support(d) for d in dirs])
    return ReachabilitySet(t, speed, source, dirs, h_a + cs * t)


def wulff_shape(speed: SpeedTable, n_dirs: int = DEFAULT_DIRECTIONS_2D) -> ReachabilitySet:
    """inter_e { y.e < c*(e) }: the normalized long-time shape."""
    dirs, cs = _speed_samples(speed, n_dirs)
    return ReachabilitySet(1.0, speed, None, dirs, cs.copy())


# ----------------------------------------------------------------------
# level-set evolution
# ----------------------------------------------------------------------

def signed_profile(source, grid: Grid) -> ScalarField:
    """Lipschitz seed function, positive inside the set, negative outside."""
    sd = -np.asarray(source.signed_distance(grid.points()), dtype=np.float64)
    return ScalarField(grid, sd.reshape(grid.shape), 0.0)


def levelset_evolve(v0: ScalarField, speed: SpeedTable, t_end: float,
                    dt: float = None, safety: float = LEVELSET_SAFETY) -> ReachabilitySet:
    """Evolve v_t = c*(n)|grad v| by first-order monotone upwinding.

    The gradient magnitude uses the expansion-upwind selection
    sum_i max(D^-_i v, 0)^2 + min(D^+_i v, 0)^2 and the speed is evaluated on
    the normal of the (regularized) central gradient.  Positive speeds only.
    """
    grid = v0.grid
    if grid.dim != 2:
        raise ConfigurationError("the level-set evolver is 2D")
    cmax = speed.c_max
    bound = safety * grid.h / (cmax * grid.dim)
    if dt is None:
        dt = bound
    elif dt > bound * (1.0 + 1e-12):
        raise IntegrationError(
            f"refusing level-set step: dt = {dt} exceeds {bound}")
    v = v0.values.copy()
    h = grid.h
    grad0 = _central_gradient_norm(v, h)
    if grad0.max() > 20.0 * max(1.0, np.abs(v).max() / (h * grid.shape[0])):
        warnings.warn("seed function looks non-Lipschitz on this grid "
                      "(gradient blowup); results may be polluted")
    n_steps = int(np.ceil(t_end / dt - 1e-12))
    t = 0.0
    for k in range(n_steps):
        step_dt = min(dt, t_end - t)
        _levelset_step(v, h, speed, step_dt)
        t += step_dt
    return ReachabilitySet(t_end, speed, None,
                           level_field=ScalarField(grid, v, t_end))


def _central_gradient_norm(v, h):
    gx = np.zeros_like(v)
    gy = np.zeros_like(v)
    gx[1:-1, :] = (v[2:, :] - v[:-2, :]) / (2 * h)
    gy[:, 1:-1] = (v[:, 2:] - v[:, :-2]) / (2 * h)
    return np.sqrt(gx * gx + gy * gy)


def _levelset_step(v, h, speed, dt):
    # one-sided differences with edge clamping (domain margins stay inert)
    dxm = np.empty_like(v)
    dxp = np.empty_like(v)
    dym = np.empty_like(v)
    dyp = np.empty_like(v)
    dxm[1:, :] = (v[1:, :] - v[:-1, :]) / h
    dxm[0, :] = 0.0
    dxp[:-1, :] = (v[1:, :] - v[:-1, :]) / h
    dxp[-1, :] = 0.0
    dym[:, 1:] = (v[:, 1:] - v[:, :-1]) / h
    dym[:, 0] = 0.0
    dyp[:, :-1] = (v[:, 1:] - v[:, :-1]) / h
    dyp[:, -1] = 0.0

    ax = np.maximum(dxm, 0.0)
    bx = np.minimum(dxp, 0.0)
    ay = np.maximum(dym, 0.0)
    by = np.minimum(dyp, 0.0)
    grad = np.sqrt(ax * ax + bx * bx + ay * ay + by * by)

    # normal from the central gradient, regularized; n = -grad v / |grad v|
    gx = 0.5 * (dxm + dxp)
    gy = 0.5 * (dym + dyp)
    ang = np.arctan2(-gy, -gx)
    c = speed.c_of_angle(ang)
    v += dt * c * grad


# ----------------------------------------------------------------------
# polygon helpers
# ----------------------------------------------------------------------

def _clip_halfplanes(directions, offsets, bound: float = None) -> np.ndarray:
    """Intersection polygon of { x.e_i <= H_i } by successive clipping."""
    if bound is None:
        bound = float(np.abs(offsets).max()) * 4.0 + 1.0
    poly = [np.array([-bound, -bound]), np.array([bound, -bound]),
            np.array([bound, bound]), np.array([-bound, bound])]
    for e, H in zip(directions, offsets):
        if not poly:
            break
        new = []
        n = len(poly)
        for i in range(n):
            p, q = poly[i], poly[(i + 1) % n]
            dp = p @ e - H
            dq = q @ e - H
            if dp <= 0:
                new.append(p)
                if dq > 0:
                    new.append(p + (q - p) * dp / (dp - dq))
            elif dq <= 0:
                new.append(p + (q - p) * dp / (dp - dq))
        poly = new
    return np.asarray(poly)


def _polygon_area(poly: np.ndarray) -> float:
    if len(poly) < 3:
        return 0.0
    x, y = poly[:, 0], poly[:, 1]
    return float(0.5 * abs(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))))


def hausdorff_masks(mask_a: np.ndarray, mask_b: np.ndarray, h: float) -> float:
    """Hausdorff distance between two raster regions."""
    if not mask_a.any() or not mask_b.any():
        return np.inf
    da = ndimage.distance_transform_edt(~mask_a, sampling=h)
    db = ndimage.distance_transform_edt(~mask_b, sampling=h)
    return float(max(da[mask_b].max(), db[mask_a].max()))


def symmetric_difference_area(mask_a: np.ndarray, mask_b: np.ndarray,
                              h: float) -> float:
    return float(np.logical_xor(mask_a, mask_b).sum()) * h * h
