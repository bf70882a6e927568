"""Stationary random ignition media over the integer lattice.

A medium multiplies a deterministic ignition profile by a random envelope

    f(x, u, omega) = (1 + sup_k  a(omega_k) * g(x - k)) * F0(u),

where omega_k are i.i.d. uniform variables attached to lattice sites k in Z^d
and realized by a counter-based hash of (seed, k), g is a radial bump, and
a maps the unit interval to bump amplitudes.  The variant with site-indexed
bumps g_j of radius j (random stick lengths) replaces a(omega_k)*g by
g_{a(omega_k)} with an index map of polynomially decaying mass.

Evaluations are pure functions of (seed, site, x, u): media can be shared
freely across workers and re-evaluation is bit-identical.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
import itertools
import math

import numpy as np

from ignifront.errors import ConfigurationError
from ignifront.profiles import IgnitionProfile

_GOLD = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)

# envelope contributions below TRUNC_TOL * reaction scale are dropped
TRUNC_TOL = 1e-12
# hard cap on the sup window radius for slowly decaying bumps
WINDOW_CAP = 64.0


def _mix64(z: np.ndarray) -> np.ndarray:
    """Avalanche finalizer (splitmix64); wrapping uint64 arithmetic intended."""
    z = (z ^ (z >> np.uint64(30))) * _MIX1
    z = (z ^ (z >> np.uint64(27))) * _MIX2
    return z ^ (z >> np.uint64(31))


def sample_site(seed: int, k) -> np.ndarray:
    """Uniform [0,1) variable of lattice site k under the given seed.

    k may be a single site (length-d sequence of ints) or an (..., d) array;
    the value depends only on (seed, k), never on evaluation order or any
    surrounding domain, so the field is stationary by construction.
    """
    k = np.atleast_2d(np.asarray(k, dtype=np.int64))
    with np.errstate(over="ignore"):
        h = _mix64(np.uint64(seed & 0xFFFFFFFFFFFFFFFF) + _GOLD)
        h = np.broadcast_to(h, k.shape[:-1]).copy()
        for j in range(k.shape[-1]):
            h = _mix64(h ^ (k[..., j].view(np.uint64) * _GOLD
                            + np.uint64(j + 1)))
    vals = (h >> np.uint64(11)).astype(np.float64) * 2.0 ** -53
    return vals[0] if vals.shape == (1,) else vals


@dataclass(frozen=True)
class EnvelopeBump:
    """Radial bump g with either compact support or algebraic decay.

    family 'hat':   g(r) = height * max(0, 1 - r/radius)
    family 'power': g(r) = height / (1 + r)**decay_exponent
    family 'zero':  g = 0 (homogeneous medium)

    ``stretch`` scales coordinates per axis before taking the radius, which
    makes the law anisotropic while keeping g Lipschitz.
    ``range_n``, when set, multiplies g by min(1, (n/2 - r)+), producing a
    finite range of dependence <= n.
    """

    family: str = "hat"
    radius: float = 2.0
    height: float = 1.0
    decay_exponent: float = 3.0
    stretch: tuple = None
    range_n: float = None

    def __post_init__(self):
        if self.family not in ("hat", "power", "zero"):
            raise ConfigurationError(f"unknown bump family {self.family!r}")
        if self.family == "hat" and self.radius <= 0:
            raise ConfigurationError("hat radius must be positive")
        if self.family == "power" and self.decay_exponent <= 0:
            raise ConfigurationError("power decay exponent must be positive")

    def __call__(self, r):
        r = np.asarray(r, dtype=np.float64)
        if self.family == "zero":
            g = np.zeros_like(r)
        elif self.family == "hat":
            g = self.height * np.clip(1.0 - r / self.radius, 0.0, None)
        else:
            g = self.height / (1.0 + r) ** self.decay_exponent
        if self.range_n is not None:
            g = g * np.clip(self.range_n / 2.0 - r, 0.0, 1.0)
        return g

    def metric_radius(self, x):
        """Radius used for g, with optional per-axis stretch applied."""
        x = np.asarray(x, dtype=np.float64)
        if self.stretch is None:
            return np.sqrt((x * x).sum(axis=-1))
        s = np.asarray(self.stretch, dtype=np.float64)
        return np.sqrt(((x / s) ** 2).sum(axis=-1))

    def support_radius(self, reaction_scale: float, amp_max: float) -> float:
        """Window radius beyond which contributions are negligible (logged).

        Exact for compact families; for power decay the radius solves
        amp*g(r) = TRUNC_TOL*scale and is capped at WINDOW_CAP.
        """
        sfac = max(self.stretch) if self.stretch is not None else 1.0
        if self.family == "zero" or amp_max <= 0 or self.height <= 0:
            return 0.0
        if self.family == "hat":
            w = self.radius * sfac
        else:
            w = (amp_max * self.height / (TRUNC_TOL * reaction_scale)) ** (
                1.0 / self.decay_exponent) - 1.0
            w = min(max(w, 1.0), WINDOW_CAP) * sfac
        if self.range_n is not None:
            w = min(w, self.range_n / 2.0)
        return float(w)

    def sup_tail(self, r: float) -> float:
        """sup of g outside radius r (used to calibrate truncation rates)."""
        if self.family == "zero":
            return 0.0
        if self.family == "hat":
            return float(self(r)) if r < self.radius else 0.0
        return float(self(r))


@dataclass(frozen=True)
class AmplitudeMap:
    """Measurable map from the unit interval to bump amplitudes.

    kind 'uniform':   a(w) = scale * w
    kind 'bernoulli': a(w) = scale * 1{w < p}
    kind 'constant':  a(w) = scale
    """

    kind: str = "uniform"
    scale: float = 1.0
    p: float = 0.5

    def __post_init__(self):
        if self.kind not in ("uniform", "bernoulli", "constant"):
            raise ConfigurationError(f"unknown amplitude map {self.kind!r}")

    def __call__(self, w):
        w = np.asarray(w, dtype=np.float64)
        if self.kind == "uniform":
            return self.scale * w
        if self.kind == "bernoulli":
            return self.scale * (w < self.p)
        return np.full_like(w, self.scale)

    @property
    def sup(self) -> float:
        return float(self.scale)


@dataclass(frozen=True)
class IndexMap:
    """Map from the unit interval to bump indices j >= 1 with mass(j) <= j^-gamma.

    Thresholds s_j = j^(1-gamma)/(gamma-1) give mass(j) = s_j - s_{j+1}
    <= j^-gamma for j >= 2 (everything above s_1 maps to j = 1).  Indices are
    capped at j_max; the capped-mass fraction s_{j_max+1} is reported.
    """

    gamma: float = 9.0
    j_max: int = 16

    def __post_init__(self):
        if self.gamma <= 1.0:
            raise ConfigurationError("index map gamma must exceed 1")

    def threshold(self, j: int) -> float:
        return min(1.0, j ** (1.0 - self.gamma) / (self.gamma - 1.0))

    def __call__(self, w):
        w = np.asarray(w, dtype=np.float64)
        # j(w) = largest j with w < s_j  -> invert the threshold formula
        with np.errstate(divide="ignore"):
            j = np.floor(((self.gamma - 1.0) * np.clip(w, 1e-300, None))
                         ** (-1.0 / (self.gamma - 1.0)))
        j = np.clip(j, 1, self.j_max).astype(np.int64)
        return j

    @property
    def capped_mass(self) -> float:
        return self.threshold(self.j_max + 1)


@dataclass(frozen=True)
class RandomMedium:
    """Stationary lattice medium; immutable and safe to share across workers.

    kind 'amplitude' multiplies one bump g by random amplitudes (standard
    construction); kind 'index' draws a per-site hat radius j = index(omega_k)
    of height stick_height (random stick lengths, infinite-range flavor).
    ``lattice_shift`` relabels sites (omega_k evaluated at k + shift), which
    realizes the stationarity group on the lattice.
    ``axis_periods`` wraps site coordinates modulo the given per-axis periods
    before hashing (used by transverse-periodic runs; logged bias source).
    """

    profile: IgnitionProfile
    dim: int
    seed: int
    bump: EnvelopeBump = EnvelopeBump()
    amplitudes: AmplitudeMap = AmplitudeMap()
    kind: str = "amplitude"
    index_map: IndexMap = None
    stick_height: float = 1.0
    lattice_shift: tuple = None
    axis_periods: tuple = None
    wrap_vector: tuple = None

    def __post_init__(self):
        if self.dim not in (1, 2, 3):
            raise ConfigurationError(f"dim must be 1, 2 or 3, got {self.dim}")
        if self.kind not in ("amplitude", "index"):
            raise ConfigurationError(f"unknown medium kind {self.kind!r}")
        if self.kind == "index" and self.index_map is None:
            object.__setattr__(self, "index_map", IndexMap())

    # -- site machinery ----------------------------------------------------

    def canonical_sites(self, k: np.ndarray) -> np.ndarray:
        """Reduce site coordinates by the configured wraps before hashing."""
        k = np.asarray(k, dtype=np.int64)
        if self.lattice_shift is not None:
            k = k + np.asarray(self.lattice_shift, dtype=np.int64)
        if self.axis_periods is not None:
            periods = np.asarray(self.axis_periods, dtype=np.int64)
            k = np.where(periods > 0, np.mod(k, np.where(periods > 0, periods, 1)), k)
        if self.wrap_vector is not None:
            L = np.asarray(self.wrap_vector, dtype=np.int64)
            n = np.floor_divide(k @ L, L @ L)
            k = k - n[..., None] * L
        return k

    def site_values(self, k: np.ndarray) -> np.ndarray:
        return sample_site(self.seed, self.canonical_sites(k))

    def shifted(self, shift) -> "RandomMedium":
        """Medium with lattice variables relabeled by an integer shift."""
        shift = tuple(int(s) for s in np.atleast_1d(shift))
        base = self.lattice_shift or (0,) * self.dim
        new = tuple(b + s for b, s in zip(base, shift))
        return replace(self, lattice_shift=new)

    def with_wraps(self, axis_periods=None, wrap_vector=None) -> "RandomMedium":
        return replace(self, axis_periods=axis_periods, wrap_vector=wrap_vector)

    # -- envelope ----------------------------------------------------------

    @property
    def amp_sup(self) -> float:
        if self.kind == "index":
            return self.stick_height
        return self.amplitudes.sup * self.bump.height

    @property
    def envelope_sup(self) -> float:
        """Upper bound on the envelope, 1 + sup(a)*sup(g)."""
        if self.kind == "index":
            return 1.0 + self.stick_height
        return 1.0 + self.amplitudes.sup * self.bump.height

    @property
    def lipschitz_bound(self) -> float:
        """Lipschitz constant of f in u (envelope times profile bound)."""
        return self.envelope_sup * self.profile.lipschitz

    def window_radius(self) -> float:
        if self.kind == "index":
            w = float(self.index_map.j_max)
            if self.bump.range_n is not None:
                w = min(w, self.bump.range_n / 2.0)
            return w
        return self.bump.support_radius(self.profile.reaction_scale(),
                                        self.amplitudes.sup)

    def _site_bump(self, dist_over: np.ndarray, j: int = None):
        """Bump value at metric distance; 'index' kind uses hat of radius j."""
        if self.kind == "index":
            g = self.stick_height * np.clip(1.0 - dist_over / j, 0.0, None)
            if self.bump.range_n is not None:
                g = g * np.clip(self.bump.range_n / 2.0 - dist_over, 0.0, 1.0)
            return g
        return self.bump(dist_over)

    def envelope_at(self, points, record_sites: bool = False):
        """Envelope 1 + sup_k a(omega_k) g(x-k) at arbitrary points.

        points: (N, d) array (or a single point).  When record_sites is set,
        also returns the list of canonical site tuples whose bump window
        touched each point (instrumentation for independence audits).
        """
        pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
        if pts.shape[-1] != self.dim:
            raise ConfigurationError(
                f"points have dim {pts.shape[-1]}, medium has dim {self.dim}")
        W = self.window_radius()
        env = np.ones(pts.shape[0])
        touched = [set() for _ in range(pts.shape[0])] if record_sites else None
        if W <= 0:
            return (env, touched) if record_sites else _unwrap(env, points)
        lo = np.floor(pts.min(axis=0) - W).astype(np.int64)
        hi = np.ceil(pts.max(axis=0) + W).astype(np.int64)
        ranges = [np.arange(lo[j], hi[j] + 1) for j in range(self.dim)]
        sites = np.stack(np.meshgrid(*ranges, indexing="ij"), axis=-1)
        sites = sites.reshape(-1, self.dim)
        omega = self.site_values(sites)
        if self.kind == "index":
            js = self.index_map(omega)
            for site, j in zip(sites, js):
                d = self.bump.metric_radius(pts - site)
                g = self._site_bump(d, int(j))
                np.maximum(env, 1.0 + g, out=env)
                if record_sites:
                    for i in np.nonzero(d < W)[0]:
                        touched[i].add(tuple(self.canonical_sites(site)))
        else:
            amps = self.amplitudes(omega)
            for site, amp in zip(sites, amps):
                d = self.bump.metric_radius(pts - site)
                if record_sites:
                    for i in np.nonzero(d < W)[0]:
                        touched[i].add(tuple(self.canonical_sites(site)))
                if amp <= 0:
                    continue
                np.maximum(env, 1.0 + amp * self._site_bump(d), out=env)
        if record_sites:
            return env, touched
        return _unwrap(env, points)

    def envelope_on_grid(self, grid, frame=None) -> np.ndarray:
        """Envelope sampled on a Grid, optionally through an oblique frame.

        frame: an orthonormal Frame mapping grid coordinates to physical
        coordinates (2D only); identity when omitted.  Sites are enumerated
        in the inflated physical bounding box, so periodic images induced by
        the configured wraps are included automatically.
        """
        if self.bump.family == "zero" and self.kind == "amplitude":
            return np.ones(grid.shape)
        axes = [grid.origin[j] + grid.h * np.arange(grid.shape[j])
                for j in range(grid.dim)]
        W = self.window_radius()
        env = np.ones(grid.shape)
        corners = _grid_corners(axes, frame)
        lo = np.floor(corners.min(axis=0) - W).astype(np.int64)
        hi = np.ceil(corners.max(axis=0) + W).astype(np.int64)
        ranges = [np.arange(lo[j], hi[j] + 1) for j in range(self.dim)]
        sites = np.stack(np.meshgrid(*ranges, indexing="ij"), axis=-1)
        sites = sites.reshape(-1, self.dim)
        omega = self.site_values(sites)
        if self.kind == "index":
            radii = self.index_map(omega).astype(np.float64)
            amps = np.full(len(sites), self.stick_height)
        else:
            radii = None
            amps = self.amplitudes(omega)
        if frame is not None:
            site_coords = frame.to_frame(sites)
        else:
            site_coords = sites.astype(np.float64)
        stretch = self.bump.stretch
        if stretch is not None and frame is not None:
            raise ConfigurationError("anisotropic bumps require an axis frame")
        for i in range(len(sites)):
            amp = amps[i]
            if amp <= 0:
                continue
            w_i = W if radii is None else min(radii[i], W)
            sl, offs = _window_slices(axes, site_coords[i], w_i, grid.h)
            if sl is None:
                continue
            d2 = _distance_sq(offs, stretch)
            dist = np.sqrt(d2)
            if radii is None:
                g = self._site_bump(dist)
            else:
                g = self._site_bump(dist, radii[i])
            np.maximum(env[sl], 1.0 + amp * g, out=env[sl])
        return env

    def spec_block(self) -> dict:
        """Config block echoed verbatim into output manifests."""
        block = {
            "kind": self.kind,
            "profile": self.profile.params(),
            "dim": self.dim,
            "seed": self.seed,
            "bump": {
                "family": self.bump.family,
                "radius_len": self.bump.radius,
                "height": self.bump.height,
                "decay_exponent": self.bump.decay_exponent,
                "stretch": self.bump.stretch,
                "range_n_len": self.bump.range_n,
            },
            "window_radius_len": self.window_radius(),
        }
        if self.kind == "index":
            block["index_map"] = {"gamma": self.index_map.gamma,
                                  "j_max": self.index_map.j_max,
                                  "capped_mass": self.index_map.capped_mass}
            block["stick_height"] = self.stick_height
        else:
            block["amplitudes"] = {"kind": self.amplitudes.kind,
                                   "scale": self.amplitudes.scale,
                                   "p": self.amplitudes.p}
        if self.axis_periods is not None:
            block["axis_periods_cells"] = list(self.axis_periods)
        if self.wrap_vector is not None:
            block["wrap_vector_cells"] = list(self.wrap_vector)
        return block


def _unwrap(env, points):
    return float(env[0]) if np.asarray(points).ndim == 1 else env


def _grid_corners(axes, frame):
    dim = len(axes)
    corners = []
    for combo in itertools.product(*[(a[0], a[-1]) for a in axes]):
        corners.append(np.asarray(combo, dtype=np.float64))
    corners = np.asarray(corners)
    if frame is not None:
        corners = frame.to_physical(corners)
    return np.atleast_2d(corners)


def _window_slices(axes, center, radius, h):
    """Index slices of the grid window |x_j - c_j| <= radius plus offsets."""
    sl = []
    offs = []
    for j, ax in enumerate(axes):
        i0 = int(np.ceil((center[j] - radius - ax[0]) / h))
        i1 = int(np.floor((center[j] + radius - ax[0]) / h))
        i0 = max(i0, 0)
        i1 = min(i1, len(ax) - 1)
        if i0 > i1:
            return None, None
        sl.append(slice(i0, i1 + 1))
        offs.append(ax[i0:i1 + 1] - center[j])
    return tuple(sl), offs


def _distance_sq(offs, stretch):
    dim = len(offs)
    d2 = 0.0
    for j, off in enumerate(offs):
        o = off if stretch is None else off / stretch[j]
        shape = [1] * dim
        shape[j] = len(off)
        d2 = d2 + (o * o).reshape(shape)
    return d2


def eval_reaction(medium: RandomMedium, x, u):
    """Reaction rate f(x, u) = envelope(x) * F0(u); total on u in R (0 outside [0,1])."""
    env = medium.envelope_at(x)
    return env * medium.profile(u)


def truncate_range(medium: RandomMedium, n: float,
                   min_n: float = None) -> RandomMedium:
    """Medium with bump g_n = g * min(1, (n/2 - |x|)+): range of dependence <= n.

    Two evaluations at distance >= n then read disjoint site sets.  ``min_n``
    (defaulting to the hypothesis record's n4 when supplied) rejects radii too
    small for the approximation-rate regime.
    """
    if min_n is not None and n < min_n:
        raise ConfigurationError(f"truncation radius {n} below n4 = {min_n}")
    if n <= 0:
        raise ConfigurationError("truncation radius must be positive")
    return replace(medium, bump=replace(medium.bump, range_n=float(n)))


def truncation_rate(medium: RandomMedium, n: float) -> float:
    """Calibrated bound on sup|f_n - f|: sup(a) * sup_{|x|>=n/2-1} g * max F0."""
    tail = medium.bump.sup_tail(max(n / 2.0 - 1.0, 0.0))
    amp = medium.amplitudes.sup if medium.kind == "amplitude" else medium.stick_height
    return amp * tail * medium.profile.reaction_scale()
