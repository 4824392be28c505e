"""Time-indexed density flows and their on-disk layout.

A flow persists as a directory: ``manifest.json`` with the scalar run data
plus one SGF1 file per stored time, so individual snapshots stay readable
by the grid-function loaders alone.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from stable_ddsde.errors import ParameterError
from stable_ddsde.besov_lp.grid import (
    GridFunction,
    TorusGrid,
    load_grid_function,
    save_grid_function,
)

_MASS_TOL = 1e-8
_FLOOR = -1e-12


@dataclass
class DensityFlow:
    """Densities on one grid at increasing times starting from 0.

    ``clipped_mass[k]`` is the negative mass removed while producing the
    k-th snapshot (0 for exact projections); it is part of the record
    because the negativity budget is a run-validity criterion.
    """

    grid: TorusGrid
    alpha: float
    times: np.ndarray
    densities: list[GridFunction]
    clipped_mass: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        self.times = np.asarray(self.times, dtype=float)
        if self.times.ndim != 1 or self.times.size < 1:
            raise ParameterError("times must be a 1-d array with at least one entry")
        if abs(self.times[0]) > 1e-15:
            raise ParameterError(f"times must start at 0, got {self.times[0]}")
        if np.any(np.diff(self.times) <= 0.0):
            raise ParameterError("times must be strictly increasing")
        if len(self.densities) != self.times.size:
            raise ParameterError(
                f"{len(self.densities)} densities for {self.times.size} times"
            )
        if self.clipped_mass is None:
            self.clipped_mass = np.zeros(self.times.size)
        self.clipped_mass = np.asarray(self.clipped_mass, dtype=float)
        if self.clipped_mass.shape != self.times.shape:
            raise ParameterError("clipped_mass must align with times")
        for k, f in enumerate(self.densities):
            if f.grid != self.grid:
                raise ParameterError(f"density {k} lives on a different grid")
            low = float(f.values.min())
            if low < _FLOOR:
                raise ParameterError(f"density at t={self.times[k]:g} dips to {low:g} below the floor")
            mass = f.mass()
            if abs(mass - 1.0) > _MASS_TOL:
                raise ParameterError(f"density at t={self.times[k]:g} has mass {mass!r}")

    def __len__(self) -> int:
        return self.times.size

    def at(self, t: float) -> GridFunction:
        """Snapshot at an exact stored time."""
        k = int(np.argmin(np.abs(self.times - t)))
        if abs(self.times[k] - t) > 1e-12 * max(1.0, abs(t)):
            raise ParameterError(f"time {t} is not stored (nearest {self.times[k]})")
        return self.densities[k]

    def final(self) -> GridFunction:
        return self.densities[-1]


def save_flow(flow: DensityFlow, directory, metadata: dict | None = None) -> None:
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    files = []
    for k, f in enumerate(flow.densities):
        name = f"density_{k:05d}.sgf"
        save_grid_function(f, out / name)
        files.append(name)
    manifest = {
        "alpha": flow.alpha,
        "grid": {"extent": flow.grid.extent, "points": flow.grid.points, "dim": flow.grid.dim},
        "times": flow.times.tolist(),
        "clipped_mass": flow.clipped_mass.tolist(),
        "files": files,
        "metadata": metadata or {},
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True))


def load_flow(directory) -> DensityFlow:
    root = Path(directory)
    manifest = json.loads((root / "manifest.json").read_text())
    grid = TorusGrid(**manifest["grid"])
    densities = []
    for name in manifest["files"]:
        f = load_grid_function(root / name)
        if f.grid != grid:
            raise ParameterError(f"snapshot {name} disagrees with the manifest grid")
        densities.append(f)
    return DensityFlow(
        grid=grid,
        alpha=float(manifest["alpha"]),
        times=np.asarray(manifest["times"]),
        densities=densities,
        clipped_mass=np.asarray(manifest["clipped_mass"]),
    )
