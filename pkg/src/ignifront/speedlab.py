"""Monte-Carlo front-speed laboratory.

Half-space ensembles integrate batched realizations (one 3D array per
direction, seeds stacked along the leading axis; elementwise updates make
the batched arithmetic identical to running members separately), record
arrival times at probe offsets along the front normal, and reduce them to
front-speed estimates, additivity defects and fluctuation statistics.

Oblique directions in 2D run in a rotated orthonormal frame: the Laplacian
is rotation invariant, sites are enumerated in physical coordinates, and the
transverse axis is wrapped by an integer lattice vector perpendicular to the
direction, so the sampled medium is exactly periodic across the seam.  The
finite transverse period is a logged bias source.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field, replace

import numpy as np

from ignifront.errors import ConfigurationError, IntegrationError
from ignifront.grids import Grid, Frame, transverse_wrap_vector
from ignifront.medium import RandomMedium
from ignifront.profiles import HypothesisParams, default_theta_star
from ignifront.shooting import compute_c0
from ignifront.solver import cfl_limit, euler_step_arrays
from ignifront.speedtable import SpeedTable
from ignifront.stats import bootstrap, bootstrap_ci, loglog_fit, weighted_linfit
from ignifront.initdata import halfspace_profile_1d

FAR_FIELD_TOL = 1e-6
_CHECK_EVERY = 100


@functools.lru_cache(maxsize=16)
def _c0_cached(theta0, lipschitz, m1, alpha1):
    from ignifront.profiles import make_profile
    return compute_c0(make_profile(theta0, lipschitz, m1, alpha1))


def c0_of(profile) -> float:
    return _c0_cached(profile.theta0, profile.lipschitz, profile.m1, profile.alpha1)


def threshold_trail_estimate(medium: RandomMedium, theta_star: float) -> float:
    """Distance by which the (1-theta*)-level trails the front midpoint.

    Behind an ignition front the approach to 1 rides the slow branch
    u' ~ alpha*(1-u)^2 / c, so the level 1-theta* lags by about
    c / (alpha1 * theta*).  Used only to size domains and horizons.
    """
    c_hi = c0_of(medium.profile) * math.sqrt(medium.envelope_sup)
    return c_hi / (medium.profile.alpha1 * theta_star)


@dataclass(frozen=True)
class EnsembleSpec:
    """Half-space ensemble geometry and numerics.

    direction is an integer lattice vector (axis or oblique rational
    direction); probes are offsets along the unit direction.  datum 'sharp'
    starts from (1-theta*)*chi_{y.e<=0} + a_level above; 'monotone' uses the
    sub-solution half-space datum (its support inflation R0 then sits ahead
    of the nominal front, so probes must exceed it).
    """

    medium: RandomMedium
    seeds: tuple
    direction: tuple
    probes: tuple
    h: float = 0.25
    min_period: float = 8.0
    theta_star: float = None
    datum: str = "sharp"
    a_level: float = 0.0
    back_margin: float = 12.0
    far_margin: float = None
    t_max: float = None
    interpolate: bool = True

    def __post_init__(self):
        if len(set(self.seeds)) != len(self.seeds):
            raise ConfigurationError("ensemble seeds must be pairwise distinct")
        if len(self.probes) < 1 or any(p <= 0 for p in self.probes):
            raise ConfigurationError("probes must be positive offsets")
        if self.datum not in ("sharp", "monotone"):
            raise ConfigurationError(f"unknown datum kind {self.datum!r}")
        if self.theta_star is None:
            object.__setattr__(self, "theta_star",
                               default_theta_star(self.medium.profile.theta0))


@dataclass
class EnsembleResult:
    """Per-seed arrival times at the probes, plus run diagnostics."""

    spec: EnsembleSpec
    e: np.ndarray
    probes: tuple
    seeds: tuple
    T_center: dict
    T_mean: dict
    h_used: float
    period_len: float
    wrap_vector: tuple
    steps: int
    t_final: float
    theta_star: float

    def seed_matrix(self, which: str = "mean") -> np.ndarray:
        """(n_seeds, n_probes) arrival-time matrix."""
        src = self.T_mean if which == "mean" else self.T_center
        return np.stack([src[p] for p in self.probes], axis=1)

    def manifest(self) -> dict:
        return {
            "medium": self.spec.medium.spec_block(),
            "direction_cells": list(self.spec.direction),
            "probes_len": list(self.probes),
            "seeds": list(self.seeds),
            "h_len": self.h_used,
            "transverse_period_len": self.period_len,
            "wrap_vector_cells": list(self.wrap_vector) if self.wrap_vector else None,
            "theta_star": self.theta_star,
            "datum": self.spec.datum,
            "a_level": self.spec.a_level,
            "steps": self.steps,
            "t_final_time": self.t_final,
        }


def run_halfspace_ensemble(spec: EnsembleSpec, on_sample=None,
                           sample_every: float = None) -> EnsembleResult:
    """Integrate all seeds of one direction as a single batched run.

    on_sample(t, u_batch, axis_coords) is invoked on the given time cadence
    (used by exclusivity probes).  Raises IntegrationError listing unreached
    seeds when the horizon is hit first, and when the far boundary becomes
    causally contaminated before the last probe crossing.
    """
    med = spec.medium
    dim = med.dim
    profile = med.profile
    level = 1.0 - spec.theta_star
    c0 = c0_of(profile)
    trail = threshold_trail_estimate(med, spec.theta_star)
    far = spec.far_margin
    if far is None:
        far = trail + math.ceil(2.0 * math.log(1e9) / c0)
    t_max = spec.t_max
    if t_max is None:
        t_max = 2.5 * (spec.probes[-1] + trail + spec.back_margin) / c0 + 50.0

    # geometry: axis 0 runs along e; transverse axes periodic
    e_int = np.asarray(spec.direction, dtype=np.int64)
    e = e_int / np.linalg.norm(e_int)
    L1 = spec.probes[-1] + far
    oblique = dim == 2 and np.count_nonzero(e_int) > 1
    frame = None
    wrap_vec = None
    periods = None
    if dim == 1:
        n1 = int(round((L1 + spec.back_margin) / spec.h)) + 1
        grid = Grid((-spec.back_margin,), (n1,), spec.h)
        boundary = ("frozen",)
        med_run = med
        period_len = 0.0
        if e_int[0] < 0:
            frame = _AxisFrame([0], -1)
    elif oblique:
        w = transverse_wrap_vector(e_int)
        wlen = float(np.linalg.norm(w))
        m = max(1, int(math.ceil(spec.min_period / wlen)))
        period_len = m * wlen
        n2 = max(4, int(round(period_len / spec.h)))
        h = period_len / n2  # spacing adjusted so the period closes exactly
        n1 = int(round((L1 + spec.back_margin) / h)) + 1
        grid = Grid((-spec.back_margin, 0.0), (n1, n2), h)
        frame = Frame(tuple(e))
        wrap_vec = tuple(int(v) for v in m * w)
        med_run = med.with_wraps(wrap_vector=wrap_vec)
        boundary = ("frozen", "periodic")
    else:
        axis = int(np.argmax(np.abs(e_int)))
        sign = 1 if e_int[axis] > 0 else -1
        # rotate so the propagation axis comes first; axis wraps keep the
        # medium exactly periodic across the transverse seams
        perm = [axis] + [j for j in range(dim) if j != axis]
        period = int(math.ceil(spec.min_period))
        n2 = int(round(period / spec.h))
        h = period / n2
        n1 = int(round((L1 + spec.back_margin) / h)) + 1
        shape = (n1,) + (n2,) * (dim - 1)
        grid = Grid((-spec.back_margin,) + (0.0,) * (dim - 1), shape, h)
        periods = tuple(0 if j == axis else period for j in range(dim))
        med_run = med.with_wraps(axis_periods=periods)
        boundary = ("frozen",) + ("periodic",) * (dim - 1)
        frame = _AxisFrame(perm, sign) if (axis != 0 or sign < 0) else None
        period_len = float(period)

    seeds = tuple(spec.seeds)
    nb = len(seeds)
    env = np.empty((nb,) + grid.shape)
    for i, s in enumerate(seeds):
        mi = replace(med_run, seed=int(s))
        env[i] = _envelope_for_run(mi, grid, frame)

    y1 = grid.axis(0)
    if spec.datum == "sharp":
        u1 = np.where(y1 <= 0.0, level, spec.a_level)
    else:
        u1, _r0 = halfspace_profile_1d(profile, spec.theta_star, y1, 0.0,
                                       dim=dim, a_shift=spec.a_level)
    u = np.broadcast_to(u1.reshape((1, -1) + (1,) * (dim - 1)),
                        (nb,) + grid.shape).copy()
    back_val, far_val = float(u1[0]), float(u1[-1])

    h = grid.h
    dt = cfl_limit(h, dim)
    lap = np.empty_like(u)
    times = np.where(u >= level, 0.0, np.inf)
    u_prev = np.empty_like(u) if spec.interpolate else None
    probe_idx = [int(round((p - grid.origin[0]) / h)) for p in spec.probes]
    far_idx = grid.shape[0] - 2
    next_sample = 0.0 if sample_every else None

    t = 0.0
    steps = 0
    while True:
        if spec.interpolate:
            np.copyto(u_prev, u)
        euler_step_arrays(u, lap, env, profile, dt, h, dim, boundary)
        # frozen ends of the propagation axis (saturated near, baseline far)
        u[:, 0] = back_val
        u[:, -1] = far_val
        t += dt
        steps += 1
        newly = np.isinf(times) & (u >= level)
        if newly.any():
            if spec.interpolate:
                du = u[newly] - u_prev[newly]
                frac = np.clip(np.where(du > 0, (level - u_prev[newly]) / np.where(du > 0, du, 1.0), 1.0), 0.0, 1.0)
                times[newly] = (t - dt) + frac * dt
            else:
                times[newly] = t
        if next_sample is not None and t >= next_sample - 1e-12:
            on_sample(t, u, y1)
            next_sample += sample_every
        if steps % _CHECK_EVERY == 0:
            done = all(np.isfinite(times[:, pi]).all() for pi in probe_idx)
            if done:
                break
            if t >= t_max:
                missing = [seeds[i] for i in range(nb)
                           if not all(np.isfinite(times[i, pi]).all() for pi in probe_idx)]
                raise IntegrationError(
                    f"probes unreached by t_max = {t_max:.1f} for seeds "
                    f"{missing}; increase t_max or shrink probes")
            contamination = float(np.max(u[:, far_idx]) - far_val)
            if contamination > FAR_FIELD_TOL:
                raise IntegrationError(
                    "far boundary causally contaminated before the last probe "
                    f"crossing (excess {contamination:.2e}); increase far_margin")

    T_center = {}
    T_mean = {}
    mid = tuple(n // 2 for n in grid.shape[1:])
    for p, pi in zip(spec.probes, probe_idx):
        sl = times[:, pi]
        T_center[p] = sl[(slice(None),) + mid].copy() if dim > 1 else sl.copy()
        T_mean[p] = sl.reshape(nb, -1).mean(axis=1)
    return EnsembleResult(spec, e, tuple(spec.probes), seeds, T_center, T_mean,
                          h, period_len, wrap_vec, steps, t, spec.theta_star)


class _AxisFrame:
    """Permutation/sign frame mapping run coordinates to physical ones."""

    def __init__(self, perm, sign):
        self.perm = perm
        self.sign = sign

    def to_physical(self, y):
        y = np.atleast_2d(np.asarray(y, dtype=np.float64))
        x = np.empty_like(y)
        for run_ax, phys_ax in enumerate(self.perm):
            x[:, phys_ax] = y[:, run_ax] * (self.sign if run_ax == 0 else 1.0)
        return x

    def to_frame(self, x):
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        y = np.empty_like(x)
        for run_ax, phys_ax in enumerate(self.perm):
            y[:, run_ax] = x[:, phys_ax] * (self.sign if run_ax == 0 else 1.0)
        return y


def _envelope_for_run(medium, grid, frame):
    if frame is None:
        return medium.envelope_on_grid(grid)
    if isinstance(frame, Frame):
        return medium.envelope_on_grid(grid, frame)
    # axis permutation: evaluate on the physically-permuted grid
    origin = [0.0] * grid.dim
    shape = [0] * grid.dim
    for run_ax, phys_ax in enumerate(frame.perm):
        o = grid.origin[run_ax]
        n = grid.shape[run_ax]
        if run_ax == 0 and frame.sign < 0:
            origin[phys_ax] = -(o + (n - 1) * grid.h)
        else:
            origin[phys_ax] = o
        shape[phys_ax] = n
    phys_grid = Grid(tuple(origin), tuple(shape), grid.h)
    env = medium.envelope_on_grid(phys_grid)
    env = np.moveaxis(env, frame.perm, range(grid.dim))
    if frame.sign < 0:
        env = np.flip(env, axis=0).copy()
    return env


# ----------------------------------------------------------------------
# estimators
# ----------------------------------------------------------------------

@dataclass
class SpeedEstimate:
    """One speed-table row: extrapolated mean slope and its uncertainty."""

    direction: tuple
    e: np.ndarray
    tbar: float
    c_star: float
    stderr: float
    ci95: tuple
    probes: tuple
    fit_amplitude: float
    fit_exponent: float
    per_probe_mean: np.ndarray
    sandwich_ok: bool


def _fit_tbar(lvals, tmat, gamma):
    """Weighted fit of T(l)/l = tbar + A l^-gamma over the probe list."""
    y = tmat.mean(axis=0) / lvals
    X = lvals ** (-gamma)
    w = lvals ** (2.0 * gamma)
    a, b = weighted_linfit(X, y, w)       # y ~ a + b X, a = tbar
    return a, b


def estimate_front_speed(result: EnsembleResult,
                         params: HypothesisParams = None) -> SpeedEstimate:
    """Extrapolated front speed c*(e) = 1/Tbar(e) with bootstrap stderr.

    Requires >= 2 probe offsets spanning a factor >= 4 and >= 8 seeds.
    """
    lvals = np.asarray(result.probes, dtype=np.float64)
    if len(lvals) < 2 or lvals.max() / lvals.min() < 4.0 - 1e-9:
        raise ConfigurationError(
            "need >= 2 probe offsets spanning at least a factor of 4")
    if len(result.seeds) < 8:
        raise ConfigurationError("need >= 8 seeds for a speed estimate")
    if params is None:
        params = HypothesisParams.for_profile(result.spec.medium.profile,
                                              theta_star=result.theta_star)
    gamma = params.defect_fit_exponent()
    tmat = result.seed_matrix("mean")
    tbar, amp = _fit_tbar(lvals, tmat, gamma)
    if tbar <= 0:
        # extrapolation overshot; fall back to the largest-probe slope
        tbar = float(tmat[:, -1].mean() / lvals[-1])
        amp = 0.0

    def stat(sub):
        a, _ = _fit_tbar(lvals, sub, gamma)
        return 1.0 / a if a > 0 else np.nan

    lo, hi, sd = bootstrap_ci(tmat, stat)
    c_star = 1.0 / tbar
    # per-realization slope sandwich T(l)/l in [1/(2 c1), 2/c0] at the far probe
    c0 = c0_of(result.spec.medium.profile)
    c1 = 2.0 * math.sqrt(result.spec.medium.lipschitz_bound * result.spec.medium.dim)
    slopes = tmat[:, -1] / lvals[-1]
    sandwich = bool(np.all((slopes >= 1.0 / (2.0 * c1)) & (slopes <= 2.0 / c0)))
    return SpeedEstimate(tuple(result.spec.direction), result.e, float(tbar),
                         float(c_star), float(sd), (float(lo), float(hi)),
                         result.probes, float(amp), gamma,
                         tmat.mean(axis=0), sandwich)


def measure_speed_table(medium: RandomMedium, directions, seeds, probes,
                        params: HypothesisParams = None, h: float = 0.25,
                        min_period: float = 8.0, runner=None,
                        **spec_kw) -> SpeedTable:
    """Speed table over 2D integer directions (one batched ensemble each)."""
    runner = runner or run_halfspace_ensemble
    rows = []
    for d in directions:
        spec = EnsembleSpec(medium=medium, seeds=tuple(seeds),
                            direction=tuple(d), probes=tuple(probes), h=h,
                            min_period=min_period, **spec_kw)
        res = runner(spec)
        rows.append(estimate_front_speed(res, params))
    dirs = np.stack([r.e for r in rows])
    return SpeedTable.from_directions(
        dirs, [r.c_star for r in rows], stderr=[r.stderr for r in rows],
        l_range=(min(probes), max(probes)),
        meta={"seeds": list(seeds), "probes_len": list(probes),
              "medium": medium.spec_block()})


@dataclass
class AdditivityDefect:
    l: float
    m: float
    defect: float
    stderr: float


@dataclass
class AdditivityReport:
    rows: list
    exponent: float
    exponent_ci: tuple

    def defects(self):
        return np.asarray([r.defect for r in self.rows])


def mean_linearity(result: EnsembleResult, pairs) -> AdditivityReport:
    """Additivity defects D(l, m) = |E T((l+m)e) - E T(le) - E T(me)|.

    Each (l, m) must have l, m and l+m among the probes.  The growth
    exponent of D against (l+m) is fitted in log-log with bootstrap CI.
    """
    probe_set = {float(p): i for i, p in enumerate(result.probes)}
    tmat = result.seed_matrix("mean")
    rows = []
    sums = []
    for (l, m) in pairs:
        for val in (l, m, l + m):
            if float(val) not in probe_set:
                raise ConfigurationError(
                    f"probe {val} missing for additivity pair ({l},{m})")
        il, im, ilm = probe_set[float(l)], probe_set[float(m)], probe_set[float(l + m)]

        def stat(sub, il=il, im=im, ilm=ilm):
            return abs(sub[:, ilm].mean() - sub[:, il].mean() - sub[:, im].mean())

        d = stat(tmat)
        _, _, sd = bootstrap_ci(tmat, stat)
        rows.append(AdditivityDefect(float(l), float(m), float(d), float(sd)))
        sums.append(float(l + m))

    sums = np.asarray(sums)
    defs = np.asarray([max(r.defect, 1e-6) for r in rows])

    def expo(sub):
        d = np.asarray([abs(sub[:, probe_set[float(l + m)]].mean()
                            - sub[:, probe_set[float(l)]].mean()
                            - sub[:, probe_set[float(m)]].mean())
                        for (l, m) in pairs])
        s, _, _ = loglog_fit(sums, np.maximum(d, 1e-6))
        return s

    slope, _, _ = loglog_fit(sums, defs)
    lo, hi, _ = bootstrap_ci(tmat, expo)
    return AdditivityReport(rows, float(slope), (float(lo), float(hi)))


@dataclass
class FluctuationReport:
    distances: np.ndarray
    sd: np.ndarray
    quantiles: dict
    exponent: float
    exponent_ci: tuple
    prefactor: float
    tail_constant: float
    tail_residual: float
    rho: float

    def manifest(self) -> dict:
        return {"distances_len": self.distances.tolist(),
                "sd_time": self.sd.tolist(),
                "exponent": self.exponent,
                "exponent_ci95": list(self.exponent_ci),
                "prefactor": self.prefactor,
                "tail_constant": self.tail_constant,
                "tail_residual": self.tail_residual,
                "rho_len": self.rho}


def fluctuation_stats(result: EnsembleResult,
                      params: HypothesisParams = None,
                      rho: float = None) -> FluctuationReport:
    """Arrival-time fluctuation scaling across probe distances.

    Per-distance standard deviations, a log-log fit of sd against distance
    with a bootstrap CI on the exponent, and a one-parameter fit of the
    exceedance curve P(|T - mean| >= lam) against the sub-Gaussian envelope
    2 exp(-lam^2 / (C (1+D) (rho + D^beta1))) using deviations above the
    60th percentile.
    """
    if len(result.seeds) < 32:
        raise ConfigurationError(
            f"fluctuation statistics need >= 32 seeds, got {len(result.seeds)}")
    dist = np.asarray(result.probes, dtype=np.float64)
    if len(dist) < 4 or dist.max() / dist.min() < 4.0 - 1e-9:
        raise ConfigurationError(
            "need >= 4 probe distances spanning at least a factor of 4")
    if params is None:
        params = HypothesisParams.for_profile(result.spec.medium.profile,
                                              theta_star=result.theta_star)
    if rho is None:
        rng_n = result.spec.medium.bump.range_n
        rho = float(rng_n) if rng_n is not None else max(
            1.0, result.spec.medium.window_radius())
    tmat = result.seed_matrix("center")
    sd = tmat.std(axis=0, ddof=1)
    quant = {q: np.quantile(tmat, q, axis=0) for q in (0.1, 0.5, 0.9)}
    slope, intercept, _ = loglog_fit(dist, sd)

    def expo(sub):
        s = sub.std(axis=0, ddof=1)
        sl, _, _ = loglog_fit(dist, np.maximum(s, 1e-12))
        return sl

    lo, hi, _ = bootstrap_ci(tmat, expo)

    # pooled tail fit against the envelope
    beta1 = params.beta1
    lams, denoms, probs = [], [], []
    for j, D in enumerate(dist):
        dev = np.abs(tmat[:, j] - tmat[:, j].mean())
        cut = np.quantile(dev, 0.6)
        lam = np.sort(dev[dev > cut])
        n = len(dev)
        for i, l in enumerate(lam):
            p = (len(lam) - i) / n
            lams.append(l)
            denoms.append((1.0 + D) * (rho + D ** beta1))
            probs.append(p)
    lams = np.asarray(lams)
    denoms = np.asarray(denoms)
    probs = np.asarray(probs)
    z = lams ** 2 / denoms
    target = np.log(2.0) - np.log(probs)
    beta = float((z * target).sum() / (z * z).sum()) if len(z) else np.nan
    C = 1.0 / beta if beta and beta > 0 else np.inf
    resid = float(np.sqrt(np.mean((target - beta * z) ** 2))) if len(z) else np.nan
    return FluctuationReport(dist, sd, quant, float(slope),
                             (float(lo), float(hi)),
                             float(np.exp(intercept)), float(C), resid,
                             float(rho))


# ----------------------------------------------------------------------
# reached-set shape from a compact source
# ----------------------------------------------------------------------

@dataclass
class WulffEstimate:
    angles: np.ndarray
    radius_over_t: np.ndarray    # ensemble mean of r(theta)/t
    per_seed: np.ndarray         # (n_seeds, n_angles)
    t_end: float
    source_radius: float

    def support_function(self, theta) -> np.ndarray:
        """max over boundary samples of x . e(theta)."""
        theta = np.atleast_1d(np.asarray(theta, dtype=np.float64))
        bx = self.radius_over_t * np.cos(self.angles)
        by = self.radius_over_t * np.sin(self.angles)
        return np.array([np.max(bx * np.cos(th) + by * np.sin(th))
                         for th in theta])


def estimate_wulff(medium: RandomMedium, seeds, t_end: float,
                   source_radius: float = 2.0, h: float = 0.25,
                   theta_star: float = None, n_angles: int = 180,
                   margin: float = None) -> WulffEstimate:
    """Normalized reached set of ball-source runs, sampled in angle (2D)."""
    if medium.dim != 2:
        raise ConfigurationError("wulff estimation runs in 2D")
    theta_star = default_theta_star(medium.profile.theta0) if theta_star is None else theta_star
    level = 1.0 - theta_star
    c0 = c0_of(medium.profile)
    c_hi = 2.0 * math.sqrt(medium.lipschitz_bound * 2.0)
    if t_end * c0 < 5.0 * source_radius:
        raise ConfigurationError(
            "t_end too small: reached-set diameter must dwarf the source")
    if margin is None:
        margin = threshold_trail_estimate(medium, theta_star) + 25.0
    L = source_radius + c_hi * 0.75 * t_end + margin
    n = int(round(2 * L / h)) + 1
    grid = Grid((-L, -L), (n, n), h)
    xs = grid.axis(0)
    rr2 = xs[:, None] ** 2 + xs[None, :] ** 2
    seeds = tuple(seeds)
    nb = len(seeds)
    env = np.empty((nb, n, n))
    for i, s in enumerate(seeds):
        env[i] = replace(medium, seed=int(s)).envelope_on_grid(grid)
    u = np.broadcast_to(np.where(rr2 <= source_radius ** 2, level, 0.0),
                        (nb, n, n)).copy()
    dt = cfl_limit(h, 2)
    steps = int(math.ceil(t_end / dt))
    lap = np.empty_like(u)
    for _ in range(steps):
        euler_step_arrays(u, lap, env, medium.profile, t_end / steps, h, 2,
                          ("frozen", "frozen"))
    reached = u >= level
    edge = np.zeros(nb, dtype=bool)
    edge |= reached[:, 0, :].any(axis=1) | reached[:, -1, :].any(axis=1)
    edge |= reached[:, :, 0].any(axis=1) | reached[:, :, -1].any(axis=1)
    if edge.any():
        raise IntegrationError(
            f"reached set touched the domain margin for seeds "
            f"{[seeds[i] for i in np.nonzero(edge)[0]]}; enlarge the domain")
    X, Y = np.meshgrid(xs, xs, indexing="ij")
    theta = np.mod(np.arctan2(Y, X), 2.0 * np.pi)
    rad = np.sqrt(rr2)
    bins = np.minimum((theta / (2.0 * np.pi) * n_angles).astype(int), n_angles - 1)
    per_seed = np.zeros((nb, n_angles))
    for i in range(nb):
        r = np.where(reached[i], rad, 0.0).ravel()
        np.maximum.at(per_seed[i], bins.ravel(), r)
    per_seed /= t_end
    angles = (np.arange(n_angles) + 0.5) * 2.0 * np.pi / n_angles
    return WulffEstimate(angles, per_seed.mean(axis=0), per_seed,
                         t_end, source_radius)
