"""End-to-end homogenization experiments.

Microscopic runs integrate the full random dynamics from data approximating
the indicator of eps^-1 * A, are parabolically rescaled, and are compared
against the effective reachable region at matching macroscopic times.  The
module also hosts the exclusivity probe (front speed seen by data carrying a
small constant a ahead of the interface) and the reaction-perturbation
inequality check used to validate the comparison machinery.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from ignifront.errors import ConfigurationError, IntegrationError
from ignifront.fieldio import ScalarField
from ignifront.grids import Grid
from ignifront.hj import ReachabilitySet, symmetric_difference_area
from ignifront.initdata import build_initial_datum
from ignifront.medium import RandomMedium
from ignifront.profiles import default_theta_star
from ignifront.sets import Ball
from ignifront.solver import cfl_limit, euler_step_arrays
from ignifront.speedlab import (EnsembleSpec, c0_of, run_halfspace_ensemble,
                                threshold_trail_estimate)
from ignifront.speedtable import SpeedTable


# ----------------------------------------------------------------------
# rescaling
# ----------------------------------------------------------------------

def rescale_field(fld: ScalarField, eps: float, stride: int = 1) -> ScalarField:
    """Parabolic rescale u_eps(t, x) = u(t/eps, x/eps) of one snapshot.

    Pure relabeling plus optional subsampling; u values are never
    interpolated.
    """
    sel = tuple(slice(None, None, stride) for _ in range(fld.dim))
    g = fld.grid
    new_grid = Grid(tuple(o * eps for o in g.origin),
                    fld.values[sel].shape, g.h * eps * stride)
    return ScalarField(new_grid, fld.values[sel].copy(), fld.t * eps)


def rescale(trajectory, eps: float, t_probes=None, stride: int = 1,
            tol: float = 1e-9):
    """Rescale a list of (possibly time-tagged) snapshots by eps.

    When t_probes is given, each requested macroscopic time must match a
    stored microscopic snapshot at t/eps; missing times raise with the list.
    """
    fields = list(trajectory)
    out = [rescale_field(f, eps, stride) for f in fields]
    if t_probes is not None:
        have = [f.t for f in out]
        missing = [t for t in t_probes
                   if not any(abs(t - ht) <= tol * max(1.0, abs(t)) + 1e-9 for ht in have)]
        if missing:
            raise ConfigurationError(
                f"snapshot cadence misses macroscopic times {missing} "
                f"(stored: {have})")
        out = [next(f for f in out
                    if abs(f.t - t) <= tol * max(1.0, abs(t)) + 1e-9)
               for t in t_probes]
    return out


# ----------------------------------------------------------------------
# microscopic batch runs
# ----------------------------------------------------------------------

def run_compact_batch(medium: RandomMedium, seeds, init_values: np.ndarray,
                      grid: Grid, snapshot_times, theta_star: float):
    """Batched compact-support run; returns {t: list of per-seed fields}."""
    seeds = tuple(seeds)
    nb = len(seeds)
    dim = grid.dim
    env = np.empty((nb,) + grid.shape)
    for i, s in enumerate(seeds):
        env[i] = replace(medium, seed=int(s)).envelope_on_grid(grid)
    u = np.broadcast_to(init_values, (nb,) + grid.shape).copy()
    dt = cfl_limit(grid.h, dim)
    lap = np.empty_like(u)
    boundary = ("frozen",) * dim
    snaps = {}
    t = 0.0
    times = sorted(float(ts) for ts in snapshot_times)
    edge_lo = [u[(slice(None),) + _axslice(dim, j, 0)].copy() for j in range(dim)]
    edge_hi = [u[(slice(None),) + _axslice(dim, j, -1)].copy() for j in range(dim)]
    for t_target in times:
        n = int(math.ceil((t_target - t) / dt - 1e-12))
        for k in range(n):
            step_dt = min(dt, t_target - t)
            euler_step_arrays(u, lap, env, medium.profile, step_dt, grid.h,
                              dim, boundary)
            for j in range(dim):
                u[(slice(None),) + _axslice(dim, j, 0)] = edge_lo[j]
                u[(slice(None),) + _axslice(dim, j, -1)] = edge_hi[j]
            t += step_dt
        snaps[t_target] = [ScalarField(grid, u[i].copy(), t) for i in range(nb)]
    return snaps


def _axslice(dim, ax, pos):
    idx = [slice(None)] * dim
    idx[ax] = pos
    return tuple(idx)


# ----------------------------------------------------------------------
# homogenization error
# ----------------------------------------------------------------------

@dataclass
class HomogErrorRecord:
    """Local-uniform sup errors off the boundary plus a symmetric-difference summary."""

    t: float
    eps: float
    delta: float
    interior_sup: float       # sup |u_eps - 1| over Theta_t eroded by delta
    exterior_sup: float       # sup |u_eps| outside Theta_t inflated by delta
    symdiff_area: float       # |{u_eps >= 1/2} xor Theta_t|
    theta_area: float
    degenerate: bool = False

    @property
    def symdiff_ratio(self) -> float:
        return self.symdiff_area / self.theta_area if self.theta_area > 0 else np.inf

    def row(self) -> dict:
        return {"t_time": self.t, "eps": self.eps, "delta_len": self.delta,
                "interior_sup": self.interior_sup,
                "exterior_sup": self.exterior_sup,
                "symdiff_area": self.symdiff_area,
                "theta_area": self.theta_area,
                "symdiff_ratio": self.symdiff_ratio}


def homog_error(u_eps: ScalarField, theta_set: ReachabilitySet, t: float,
                delta: float) -> HomogErrorRecord:
    """Compare a rescaled snapshot against the effective region at time t."""
    grid = u_eps.grid
    inner = theta_set.eroded(delta).mask_on(grid)
    outer = ~theta_set.inflated(delta).mask_on(grid)
    degenerate = not inner.any()
    if degenerate:
        warnings.warn("erosion margin exceeds the region feature size")
        interior = 0.0
    else:
        interior = float(np.abs(u_eps.values[inner] - 1.0).max())
    exterior = float(u_eps.values[outer].max()) if outer.any() else 0.0
    theta_mask = theta_set.mask_on(grid)
    sym = symmetric_difference_area(u_eps.values >= 0.5, theta_mask, grid.h)
    if theta_set.kind == "support":
        area = theta_set.area()
    else:
        area = float(theta_mask.sum()) * grid.h ** grid.dim
    eps = u_eps.t / t if t > 0 else np.nan  # informational only
    return HomogErrorRecord(t, eps, delta, interior, exterior, sym, area,
                            degenerate)


@dataclass
class HomogExperiment:
    """One eps-sweep against a fixed speed table.

    epsilons must decrease strictly; the microscopic domain automatically
    covers eps^-1 * (A inflated by c_max t_max plus causal margin).
    y_shift translates the initial data (robustness knob); psi_margin
    shrinks/扩 the initial indicator by the stated amount before scaling.
    """

    source: Ball
    medium: RandomMedium
    seeds: tuple
    epsilons: tuple
    t_probes: tuple
    speed: SpeedTable
    h_micro: float = 0.25
    theta_star: float = None
    delta: float = 0.1
    y_shift: tuple = None
    psi_margin: float = 0.0

    def __post_init__(self):
        eps = list(self.epsilons)
        if any(e2 >= e1 for e1, e2 in zip(eps, eps[1:])):
            raise ConfigurationError("epsilon list must be strictly decreasing")
        if self.theta_star is None:
            self.theta_star = default_theta_star(self.medium.profile.theta0)


def run_homog_experiment(exp: HomogExperiment):
    """Run the eps sweep; returns {eps: {t: [HomogErrorRecord per seed]}}."""
    level = 1.0 - exp.theta_star
    t_max = max(exp.t_probes)
    c_hi = exp.speed.c_max
    out = {}
    for eps in exp.epsilons:
        scale = 1.0 / eps
        src = Ball(tuple(c * scale for c in exp.source.center),
                   max(exp.source.radius * scale - exp.psi_margin * scale, exp.h_micro))
        trail = threshold_trail_estimate(exp.medium, exp.theta_star)
        margin = trail + 2.0 * math.log(1e9) / c0_of(exp.medium.profile)
        L = (exp.source.radius + (c_hi * t_max + exp.delta) * 1.2) * scale + margin
        dimn = exp.medium.dim
        n = int(round(2 * L / exp.h_micro)) + 1
        grid = Grid((-L,) * dimn, (n,) * dimn, exp.h_micro)
        pts = grid.points()
        if exp.y_shift is not None:
            pts = pts - np.asarray(exp.y_shift, dtype=np.float64) * scale
        init = np.where(src.signed_distance(pts) <= 0.0, level, 0.0)
        init = init.reshape(grid.shape)
        micro_times = [t * scale for t in exp.t_probes]
        snaps = run_compact_batch(exp.medium, exp.seeds, init, grid,
                                  micro_times, exp.theta_star)
        from ignifront.hj import theta_convex
        out[eps] = {}
        for t in exp.t_probes:
            theta = theta_convex(exp.source, exp.speed, t)
            recs = []
            for fld in snaps[t * scale]:
                u_eps = rescale_field(fld, eps)
                if exp.y_shift is not None:
                    g = u_eps.grid
                    shifted = Grid(tuple(o + s for o, s in zip(g.origin, exp.y_shift)),
                                   g.shape, g.h)
                    u_eps = ScalarField(shifted, u_eps.values, u_eps.t)
                rec = homog_error(u_eps, theta, t, exp.delta)
                rec.eps = eps
                recs.append(rec)
            out[eps][t] = recs
    return out


# ----------------------------------------------------------------------
# exclusivity probe
# ----------------------------------------------------------------------

@dataclass
class ExclusivityRecord:
    a: float
    margin: float
    times: np.ndarray
    sup_ahead: np.ndarray      # (n_seeds, n_times)
    ceiling: float             # expected asymptotic ceiling (= a)
    certified_a_max: float
    above_certified: bool
    profiles: np.ndarray = field(default=None, repr=False)  # (n_seeds, n_times, n1)
    axis: np.ndarray = field(default=None, repr=False)
    c_ref: float = 0.0

    def sup_ahead_at_margin(self, margin: float) -> np.ndarray:
        """Recompute the ahead-region sup for a different margin."""
        out = np.empty((self.profiles.shape[0], len(self.times)))
        for j, t in enumerate(self.times):
            cut = (self.c_ref + margin) * t
            sel = self.axis >= cut
            out[:, j] = self.profiles[:, j, sel].max(axis=1) if sel.any() else 0.0
        return out


def exclusivity_probe(medium: RandomMedium, seeds, direction, a: float,
                      horizon: float, c_ref: float = None,
                      margin: float = 0.5, sample_every: float = 5.0,
                      theta_star: float = None,
                      m_star_emp: float = None) -> ExclusivityRecord:
    """Evolve data chi_{H^-} + a chi_{H^+} and watch the region ahead.

    Reports sup of the solution over { x.e >= (c_ref + margin) t } at the
    sampled times; the expected ceiling is a.  ``a`` must lie in
    [0, theta1/2]; values above the certified range
    0.5*min(theta*, 1/M*_emp) are flagged rather than rejected (the probe is
    still meaningful below the ignition threshold).
    """
    theta_star = default_theta_star(medium.profile.theta0) if theta_star is None else theta_star
    theta1 = medium.profile.theta0
    if a < 0 or a > 0.5 * theta1:
        raise ConfigurationError(
            f"exclusivity baseline a = {a} outside [0, theta1/2 = {0.5 * theta1}]")
    cert = 0.5 * min(theta_star, 1.0 / m_star_emp) if m_star_emp else 0.5 * theta_star
    e_int = np.asarray(direction, dtype=np.int64)
    if np.count_nonzero(e_int) != 1:
        raise ConfigurationError("exclusivity probe needs an axis direction")
    if c_ref is None:
        c_ref = c0_of(medium.profile) * math.sqrt(medium.envelope_sup)
    samples = []

    def on_sample(t, u, y1):
        flat = u.reshape(u.shape[0], u.shape[1], -1).max(axis=2)
        samples.append((t, flat.copy()))

    spec = EnsembleSpec(medium=medium, seeds=tuple(seeds),
                        direction=tuple(int(v) for v in e_int), probes=(),
                        a_level=float(a), theta_star=theta_star,
                        t_max=horizon,
                        far_margin=(c_ref + margin) * horizon * 1.05 + 20.0)
    res = run_halfspace_ensemble(spec, on_sample=on_sample,
                                 sample_every=sample_every)
    times = np.array([s[0] for s in samples])
    prof = np.stack([s[1] for s in samples], axis=1)  # (nb, nt, n1)
    n1 = prof.shape[2]
    axis = -spec.back_margin + res.h_used * np.arange(n1)
    sup = np.empty((prof.shape[0], len(times)))
    for j, t in enumerate(times):
        cut = (c_ref + margin) * t
        sel = axis >= cut
        sup[:, j] = prof[:, j, sel].max(axis=1) if sel.any() else 0.0
    return ExclusivityRecord(a, margin, times, sup, a, cert, a > cert,
                             prof, axis, c_ref)


# ----------------------------------------------------------------------
# perturbation comparison inequality
# ----------------------------------------------------------------------

@dataclass
class PerturbationRecord:
    seed: int
    kind: str
    t_u1: float
    t_u2: float
    bound: float
    holds: bool
    radius_ok: bool


def perturbation_check(medium: RandomMedium, eta: float, t0: float,
                       probe_y: float, seeds, calib, kind: str = "levelset",
                       h: float = 0.1, source_radius: float = 3.0,
                       theta_star: float = None):
    """Paired 1D runs testing the arrival-time comparison inequality.

    kind 'levelset': the second reaction vanishes wherever u1(t0) >= 1-eta
    (modification confined above the level set, rates within the Lipschitz
    class).  kind 'uniform': f2 = max(f1 - alpha3*eta^m3, 0) inside B_R(y).
    The check passes when

        T_{u2}(y) >= (T_{u1}(y) - t0 - slack) / (1 + M*_emp eta),

    with slack = 2*kappa*_emp + kappa0_emp from the calibration record.
    """
    if medium.dim != 1:
        raise ConfigurationError("perturbation checks run in 1D")
    if kind not in ("levelset", "uniform"):
        raise ConfigurationError(f"unknown perturbation kind {kind!r}")
    theta_star = default_theta_star(medium.profile.theta0) if theta_star is None else theta_star
    theta1 = medium.profile.theta0
    if eta < 0 or eta > 0.5 * theta1:
        raise ConfigurationError(
            f"eta = {eta} outside [0, theta1/2 = {0.5 * theta1}]")
    cert = 0.5 * min(theta_star, 1.0 / calib.m_star_emp)
    if eta > cert:
        warnings.warn(
            f"eta = {eta} above the certified bound {cert:.4g}; the "
            "inequality is reported but not covered by the supersolution regime")

    profile = medium.profile
    level = 1.0 - theta_star
    c0 = c0_of(profile)
    trail = threshold_trail_estimate(medium, theta_star)
    from ignifront.initdata import build_initial_datum, DEFAULT_BUMP_SCALE, MOLLIFIER_A, MOLLIFIER_N

    r0 = (MOLLIFIER_N[1] + 0.5 + MOLLIFIER_A) * DEFAULT_BUMP_SCALE[1]
    if probe_y <= source_radius + r0 + 5.0:
        raise ConfigurationError(
            f"probe must clear the datum support (> {source_radius + r0 + 5.0:.1f})")
    far = trail + 2.0 * math.log(1e9) / c0
    lo = -(source_radius + r0 + 2.0)
    hi = probe_y + far
    grid = Grid((lo,), (int(round((hi - lo) / h)) + 1,), h)
    datum = build_initial_datum(Ball((0.0,), source_radius), profile, grid,
                                theta_star=theta_star)
    init = datum.field.values
    t_max = 2.5 * (probe_y + trail) / c0 + 100.0
    seeds = tuple(seeds)
    nb = len(seeds)
    env = np.empty((nb,) + grid.shape)
    for i, s in enumerate(seeds):
        env[i] = replace(medium, seed=int(s)).envelope_on_grid(grid)
    dt = cfl_limit(h, 1)
    slack = 2.0 * calib.kappa_star_emp + calib.kappa0_emp
    iy = grid.index_of((probe_y,))[0]
    xaxis = grid.axis(0)

    u = np.broadcast_to(init, (nb,) + grid.shape).copy()
    lap = np.empty_like(u)
    times1 = np.where(u >= level, 0.0, np.inf)
    snap_t0 = None
    t = 0.0
    while True:
        euler_step_arrays(u, lap, env, profile, dt, h, 1, ("frozen",))
        u[:, 0] = init[0]
        u[:, -1] = init[-1]
        t += dt
        newly = np.isinf(times1) & (u >= level)
        times1[newly] = t
        if snap_t0 is None and t >= t0:
            snap_t0 = u.copy()
        if np.isfinite(times1[:, iy]).all():
            break
        if t > t_max:
            missing = [seeds[i] for i in range(nb) if not np.isfinite(times1[i, iy])]
            raise IntegrationError(f"probe unreached for seeds {missing}")
    t_u1 = times1[:, iy].copy()
    if snap_t0 is None:
        raise ConfigurationError("t0 exceeds the first run horizon")

    # modified reaction and the second (resumed) runs
    if kind == "levelset":
        damp = (snap_t0 < level + 0.0) * 1.0
        damp = (snap_t0 < 1.0 - eta).astype(np.float64)
        env2 = env * damp
        shift = None
    else:
        env2 = env
        shift = np.zeros(grid.shape)
        radius = calib.d2_emp * (1.0 + float(np.max(t_u1)))
        shift[np.abs(xaxis - probe_y) <= radius] = \
            calib.params.alpha3 * eta ** calib.params.m3
    u2 = snap_t0.copy()
    times2 = np.where(u2 >= level, 0.0, np.inf)
    t = 0.0
    while True:
        if shift is None:
            euler_step_arrays(u2, lap, env2, profile, dt, h, 1, ("frozen",))
        else:
            # rate = max(env*F0(u) - shift, 0); assembled inline
            from ignifront.solver import laplacian_into
            laplacian_into(u2, lap, 1, ("frozen",))
            lap *= 1.0 / (h * h)
            rate = profile(u2)
            rate *= env2
            rate -= shift
            np.clip(rate, 0.0, None, out=rate)
            lap += rate
            lap *= dt
            u2 += lap
            np.clip(u2, 0.0, 1.0, out=u2)
        u2[:, 0] = snap_t0[:, 0]
        u2[:, -1] = snap_t0[:, -1]
        t += dt
        newly = np.isinf(times2) & (u2 >= level)
        times2[newly] = t
        if np.isfinite(times2[:, iy]).all():
            break
        if t > t_max:
            missing = [seeds[i] for i in range(nb) if not np.isfinite(times2[i, iy])]
            raise IntegrationError(f"probe unreached in modified run for seeds {missing}")
    t_u2 = times2[:, iy].copy()

    radius = calib.d2_emp * (1.0 + float(np.max(t_u2)))
    radius_ok = (probe_y - radius >= xaxis[0]) and (probe_y + radius <= xaxis[-1])
    records = []
    for i, s in enumerate(seeds):
        bound = (t_u1[i] - t0 - slack) / (1.0 + calib.m_star_emp * eta)
        records.append(PerturbationRecord(int(s), kind, float(t_u1[i]),
                                          float(t_u2[i]), float(bound),
                                          bool(t_u2[i] >= bound), radius_ok))
    return records
