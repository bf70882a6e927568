"""Direction-resolved front speed tables.

A SpeedTable samples e -> c*(e) on the unit circle (2D; 1D and simple 3D
tables are supported through explicit direction vectors).  Interpolation is
piecewise linear in angle, which preserves the Lipschitz class of the
sampled speed.  CSV layout: angle_rad, cstar, stderr[, tbar, l_lo, l_hi].
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ignifront.errors import ConfigurationError

TWO_PI = 2.0 * np.pi


@dataclass
class SpeedTable:
    """Sampled direction -> speed map with confidence data."""

    angles: np.ndarray           # radians in [0, 2pi), sorted
    c_star: np.ndarray
    stderr: np.ndarray = None
    tbar: np.ndarray = None      # mean arrival slope (time/length), 1/c_star
    l_range: tuple = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        a = np.mod(np.asarray(self.angles, dtype=np.float64), TWO_PI)
        order = np.argsort(a)
        self.angles = a[order]
        self.c_star = np.asarray(self.c_star, dtype=np.float64)[order]
        if np.any(self.c_star <= 0):
            raise ConfigurationError("speeds must be positive")
        if self.stderr is not None:
            self.stderr = np.asarray(self.stderr, dtype=np.float64)[order]
        if self.tbar is None:
            self.tbar = 1.0 / self.c_star
        else:
            self.tbar = np.asarray(self.tbar, dtype=np.float64)[order]

    @classmethod
    def constant(cls, c: float, n: int = 8) -> "SpeedTable":
        ang = np.linspace(0.0, TWO_PI, n, endpoint=False)
        return cls(ang, np.full(n, float(c)))

    @classmethod
    def from_directions(cls, directions, speeds, stderr=None, **kw) -> "SpeedTable":
        d = np.atleast_2d(np.asarray(directions, dtype=np.float64))
        if d.shape[1] != 2:
            raise ConfigurationError("from_directions expects 2D unit vectors")
        ang = np.arctan2(d[:, 1], d[:, 0])
        return cls(ang, speeds, stderr=stderr, **kw)

    def c_of_angle(self, theta):
        """Piecewise-linear interpolation in angle (wrapping)."""
        theta = np.mod(np.asarray(theta, dtype=np.float64), TWO_PI)
        ang = np.concatenate([self.angles, [self.angles[0] + TWO_PI]])
        cs = np.concatenate([self.c_star, [self.c_star[0]]])
        return np.interp(theta, ang, cs)

    def c_of_direction(self, e):
        e = np.asarray(e, dtype=np.float64)
        if e.ndim == 1:
            return float(self.c_of_angle(np.arctan2(e[1], e[0])))
        return self.c_of_angle(np.arctan2(e[..., 1], e[..., 0]))

    @property
    def c_max(self) -> float:
        return float(self.c_star.max())

    @property
    def c_min(self) -> float:
        return float(self.c_star.min())

    def directions(self) -> np.ndarray:
        return np.stack([np.cos(self.angles), np.sin(self.angles)], axis=-1)

    def write_csv(self, path) -> Path:
        path = Path(path)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            header = ["angle_rad", "cstar", "stderr"]
            if self.l_range is not None:
                header += ["l_lo_len", "l_hi_len"]
            w.writerow(header)
            for i in range(len(self.angles)):
                row = [repr(float(self.angles[i])), repr(float(self.c_star[i])),
                       repr(float(self.stderr[i])) if self.stderr is not None else ""]
                if self.l_range is not None:
                    row += [repr(float(self.l_range[0])), repr(float(self.l_range[1]))]
                w.writerow(row)
        return path

    @classmethod
    def read_csv(cls, path) -> "SpeedTable":
        angles, speeds, errs = [], [], []
        with open(path, newline="") as fh:
            rd = csv.DictReader(fh)
            for row in rd:
                angles.append(float(row["angle_rad"]))
                speeds.append(float(row["cstar"]))
                errs.append(float(row["stderr"]) if row.get("stderr") else np.nan)
        err = np.asarray(errs)
        return cls(np.asarray(angles), np.asarray(speeds),
                   stderr=None if np.isnan(err).all() else err)
