"""Small statistics helpers: deterministic bootstrap and log-log fits."""

from __future__ import annotations

import numpy as np

BOOTSTRAP_REPLICATES = 1000
BOOTSTRAP_SEED = 0x1905


def bootstrap(values: np.ndarray, statistic, n_boot: int = BOOTSTRAP_REPLICATES,
              seed: int = BOOTSTRAP_SEED):
    """Seed-resampled bootstrap replicates of ``statistic(values[idx])``.

    values: (n, ...) array resampled along axis 0.  Deterministic: the
    resampling stream is fixed by ``seed``.
    """
    rng = np.random.default_rng(seed)
    n = len(values)
    out = []
    for _ in range(n_boot):
        idx = rng.integers(0, n, size=n)
        out.append(statistic(values[idx]))
    return np.asarray(out)


def bootstrap_ci(values, statistic, level: float = 0.95, **kw):
    """(lo, hi) percentile interval plus the replicate standard deviation."""
    reps = bootstrap(values, statistic, **kw)
    alpha = 0.5 * (1.0 - level)
    lo, hi = np.quantile(reps, [alpha, 1.0 - alpha], axis=0)
    return lo, hi, reps.std(axis=0, ddof=1)


def loglog_fit(x, y, weights=None):
    """Least squares of log y on log x; returns (slope, intercept, residuals)."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    keep = (x > 0) & (y > 0)
    lx, ly = np.log(x[keep]), np.log(y[keep])
    w = np.ones_like(lx) if weights is None else np.asarray(weights)[keep]
    A = np.stack([lx, np.ones_like(lx)], axis=1)
    W = np.sqrt(w)
    coef, *_ = np.linalg.lstsq(A * W[:, None], ly * W, rcond=None)
    resid = ly - A @ coef
    return float(coef[0]), float(coef[1]), resid


def weighted_linfit(x, y, weights):
    """Weighted least squares y ~ a + b*x; returns (a, b)."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    w = np.asarray(weights, dtype=np.float64)
    A = np.stack([np.ones_like(x), x], axis=1)
    W = np.sqrt(w)
    coef, *_ = np.linalg.lstsq(A * W[:, None], y * W, rcond=None)
    return float(coef[0]), float(coef[1])
