"""Empirical stand-ins for the non-explicit comparison constants.

The comparison machinery uses a handful of constants that exist but have no
formula: the interface slope floor mu* (smallest u_t on the mid band), its
burn-in time kappa*, the spreading catch-up lag kappa0, and the derived
M* = (1+M)/mu*.  They are measured once per configuration on the
homogeneous medium from a monotone half-space run and frozen into a record
keyed by the config hash.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, asdict
from pathlib import Path

import numpy as np

from ignifront.errors import CalibrationError, ConfigurationError
from ignifront.grids import Grid
from ignifront.initdata import halfspace_profile_1d
from ignifront.medium import RandomMedium
from ignifront.profiles import HypothesisParams, default_theta_star
from ignifront.shooting import compute_c0
from ignifront.solver import cfl_limit, euler_step_arrays


@dataclass
class CalibrationRecord:
    c0_shoot: float
    c0_sim: float
    mu_star_emp: float
    kappa_star_emp: float
    kappa0_emp: float
    m_star_emp: float
    d2_emp: float
    h_used: float
    params: HypothesisParams

    def as_dict(self) -> dict:
        d = asdict(self)
        d["params"] = self.params.as_dict()
        return d

    def write(self, path, config_hash: str = None) -> Path:
        path = Path(path)
        payload = {"config_hash": config_hash, "constants": self.as_dict()}
        with open(path, "w") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")
        return path

    @classmethod
    def read(cls, path) -> "CalibrationRecord":
        with open(path) as fh:
            payload = json.load(fh)
        c = payload["constants"]
        pd = c.pop("params")
        pd.pop("beta1", None)
        params = HypothesisParams(**pd)
        return cls(params=params, **{k: c[k] for k in c})


def calibrate(medium: RandomMedium, params: HypothesisParams = None,
              h: float = 0.1, front_run: float = 45.0) -> CalibrationRecord:
    """Measure the empirical constants on a (near-)homogeneous 1D medium.

    Runs a monotone half-space front, tracks the smallest discrete u_t on
    the band [theta*, 1-theta*], extracts the burn-in time, and reads the
    spreading lag from the arrival map.  Raises CalibrationError when the
    run is not monotone (which the sub-solution datum guarantees).
    """
    if medium.dim != 1:
        medium = RandomMedium(profile=medium.profile, dim=1, seed=medium.seed,
                              bump=medium.bump, amplitudes=medium.amplitudes)
    profile = medium.profile
    if params is None:
        params = HypothesisParams.for_profile(profile)
    theta_star = params.theta_star
    level = 1.0 - theta_star

    c0 = compute_c0(profile)
    trail = 2.0 * math.sqrt(medium.envelope_sup) * c0 / (profile.alpha1 * theta_star)
    lo = -20.0
    hi = front_run + trail + 2.0 * math.log(1e9) / c0
    grid = Grid((lo,), (int(round((hi - lo) / h)) + 1,), h)
    x = grid.axis(0)
    vals, _r0 = halfspace_profile_1d(profile, theta_star, x, front_at=lo + 10.0, dim=1)
    env = medium.envelope_on_grid(grid)
    u = vals.copy()
    dt = cfl_limit(h, 1)
    lap = np.empty_like(u)
    times = np.where(u >= level, 0.0, np.inf)
    t = 0.0
    slope_series = []
    min_ut_global = np.inf
    t_max = 2.5 * (hi - lo + trail) / c0 + 100.0
    probe_hi = front_run * 0.9
    i_hi = int(round((probe_hi - lo) / h))
    u_prev = np.empty_like(u)
    while not np.isfinite(times[i_hi]):
        np.copyto(u_prev, u)
        euler_step_arrays(u, lap, env, profile, dt, h, 1, ("frozen",))
        u[0] = vals[0]
        u[-1] = vals[-1]
        t += dt
        newly = np.isinf(times) & (u >= level)
        times[newly] = t
        ut = (u - u_prev) / dt
        min_ut_global = min(min_ut_global, float(ut.min()))
        band = (u >= theta_star) & (u <= level)
        if band.any():
            slope_series.append((t, float(ut[band].min())))
        if t > t_max:
            raise CalibrationError("calibration run exceeded its horizon")
    if min_ut_global < -1e-8:
        raise CalibrationError(
            f"non-monotone calibration run (min u_t = {min_ut_global:.2e})")

    ts = np.array([s[0] for s in slope_series])
    ms = np.array([s[1] for s in slope_series])
    floor = float(np.min(ms[ts >= 0.5 * t]))
    if floor <= 0:
        raise CalibrationError("interface slope floor is not positive")
    ok = ms >= 0.5 * floor
    k = len(ok)
    while k > 0 and ok[k - 1]:
        k -= 1
    kappa_star = float(ts[k]) if k > 0 else float(ts[0])

    # spreading lag: worst excess of arrival over the c0/2 cone
    sel = (x >= 5.0) & (x <= probe_hi) & np.isfinite(times)
    xs, Ts = x[sel], times[sel]
    lag = 0.0
    for i in range(0, len(xs), max(1, len(xs) // 64)):
        ahead = xs > xs[i]
        if ahead.any():
            lag = max(lag, float(np.max(Ts[ahead] - Ts[i]
                                        - 2.0 * (xs[ahead] - xs[i]) / c0)))
    kappa0 = lag + 1.0

    # simulated speed from the arrival slope over the settled window
    win = (xs >= 15.0) & (xs <= probe_hi)
    A = np.stack([xs[win], np.ones(win.sum())], axis=1)
    coef, *_ = np.linalg.lstsq(A, Ts[win], rcond=None)
    c0_sim = 1.0 / float(coef[0])

    mu = floor
    m_star = (1.0 + profile.lipschitz) / mu
    return CalibrationRecord(
        c0_shoot=float(c0), c0_sim=float(c0_sim), mu_star_emp=float(mu),
        kappa_star_emp=float(kappa_star), kappa0_emp=float(kappa0),
        m_star_emp=float(m_star), d2_emp=float(params.d2(medium.dim)),
        h_used=float(h), params=params)
