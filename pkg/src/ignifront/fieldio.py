"""Scalar fields on uniform grids and their snapshot file format.

Snapshot files are flat binary: a fixed header (magic, dim, shape, spacing,
origin, time) followed by C-ordered float64 samples, plus a JSON sidecar
carrying run metadata.  The format is deliberately dumb so snapshots diff
cleanly and load anywhere.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ignifront.errors import ConfigurationError
from ignifront.grids import Grid

MAGIC = b"IGF1"


@dataclass
class ScalarField:
    """u(t, .) sampled on a Grid."""

    grid: Grid
    values: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.shape != self.grid.shape:
            raise ConfigurationError(
                f"values shape {self.values.shape} != grid shape {self.grid.shape}")

    @property
    def dim(self) -> int:
        return self.grid.dim

    def copy(self) -> "ScalarField":
        return ScalarField(self.grid, self.values.copy(), self.t)

    @classmethod
    def constant(cls, grid: Grid, value: float, t: float = 0.0) -> "ScalarField":
        return cls(grid, np.full(grid.shape, float(value)), t)


def write_field(path, fld: ScalarField, metadata: dict = None) -> Path:
    """Write a snapshot (binary + '.json' sidecar); returns the binary path."""
    path = Path(path)
    dim = fld.dim
    header = MAGIC + struct.pack("<q", dim)
    header += struct.pack(f"<{dim}q", *fld.grid.shape)
    header += struct.pack("<d", fld.grid.h)
    header += struct.pack(f"<{dim}d", *fld.grid.origin)
    header += struct.pack("<d", fld.t)
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(fld.values).tobytes())
    side = {"format": "ignifront-field-v1", "dim": dim,
            "shape": list(fld.grid.shape), "h_len": fld.grid.h,
            "origin_len": list(fld.grid.origin), "t_time": fld.t}
    if metadata:
        side["metadata"] = metadata
    sidecar = path.with_suffix(path.suffix + ".json")
    with open(sidecar, "w") as fh:
        json.dump(side, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def read_field(path) -> ScalarField:
    path = Path(path)
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != MAGIC:
            raise ConfigurationError(f"{path} is not a field snapshot (bad magic)")
        (dim,) = struct.unpack("<q", fh.read(8))
        shape = struct.unpack(f"<{dim}q", fh.read(8 * dim))
        (h,) = struct.unpack("<d", fh.read(8))
        origin = struct.unpack(f"<{dim}d", fh.read(8 * dim))
        (t,) = struct.unpack("<d", fh.read(8))
        n = int(np.prod(shape))
        values = np.frombuffer(fh.read(8 * n), dtype="<f8").reshape(shape)
    return ScalarField(Grid(origin, shape, h), values.copy(), t)
