"""Uniform periodic grids and sampled functions on them.

A torus of extent ``L`` stands in for the whole space; statements about
functions on R^d are trusted only when essentially all of their mass sits
in the middle half of the box, which ``GridFunction.wrap_mass`` monitors.
"""

from __future__ import annotations

import csv
import struct
from dataclasses import dataclass, field

import numpy as np

from stable_ddsde.errors import ParameterError

_MAGIC = b"SGF1"


def _is_power_of_two(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class TorusGrid:
    """Uniform grid on ``[-extent/2, extent/2)^dim`` with periodic wrap."""

    extent: float
    points: int
    dim: int = 1

    def __post_init__(self) -> None:
        if self.dim not in (1, 2):
            raise ParameterError(f"dim must be 1 or 2, got {self.dim}")
        if not self.extent > 0.0:
            raise ParameterError(f"extent must be positive, got {self.extent}")
        if not _is_power_of_two(self.points):
            raise ParameterError(f"points must be a power of two, got {self.points}")
        min_points = 256 if self.dim == 1 else 128
        if self.points < min_points:
            raise ParameterError(
                f"points must be >= {min_points} for dim={self.dim}, got {self.points}"
            )

    @property
    def spacing(self) -> float:
        return self.extent / self.points

    @property
    def cell_volume(self) -> float:
        return self.spacing**self.dim

    @property
    def nyquist(self) -> float:
        """Largest resolved angular frequency, ``pi * points / extent``."""
        return np.pi * self.points / self.extent

    def axis(self) -> np.ndarray:
        return (np.arange(self.points) - self.points // 2) * self.spacing

    def mesh(self) -> tuple[np.ndarray, ...]:
        ax = self.axis()
        if self.dim == 1:
            return (ax,)
        return tuple(np.meshgrid(ax, ax, indexing="ij"))

    def freq_axis(self) -> np.ndarray:
        return 2.0 * np.pi * np.fft.fftfreq(self.points, d=self.spacing)

    def freq_norm(self) -> np.ndarray:
        """|k| in FFT layout, shape ``(points,)*dim``."""
        k = self.freq_axis()
        if self.dim == 1:
            return np.abs(k)
        kx, ky = np.meshgrid(k, k, indexing="ij")
        return np.sqrt(kx**2 + ky**2)

    def middle_half_mask(self) -> np.ndarray:
        ax = np.abs(self.axis()) <= self.extent / 4.0
        if self.dim == 1:
            return ax
        return np.outer(ax, ax)


@dataclass
class GridFunction:
    """Real samples on a TorusGrid; finite values enforced at construction."""

    grid: TorusGrid
    values: np.ndarray

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=float)
        expected = (self.grid.points,) * self.grid.dim
        if self.values.shape != expected:
            raise ParameterError(
                f"values shape {self.values.shape} does not match grid shape {expected}"
            )
        if not np.all(np.isfinite(self.values)):
            raise ParameterError("grid function values must be finite")

    def copy(self) -> "GridFunction":
        return GridFunction(self.grid, self.values.copy())

    def mass(self) -> float:
        return float(np.sum(self.values) * self.grid.cell_volume)

    def lp_norm(self, p) -> float:
        if p == np.inf or p == "inf":
            return float(np.max(np.abs(self.values)))
        p = float(p)
        if p <= 0:
            raise ParameterError(f"p must be positive or inf, got {p}")
        return float((np.sum(np.abs(self.values) ** p) * self.grid.cell_volume) ** (1.0 / p))

    def l1_distance(self, other: "GridFunction") -> float:
        if other.grid != self.grid:
            raise ParameterError("grids must match")
        return float(np.sum(np.abs(self.values - other.values)) * self.grid.cell_volume)

    def wrap_mass(self) -> float:
        """L1 mass outside the middle half of the box."""
        mask = self.grid.middle_half_mask()
        return float(np.sum(np.abs(self.values[~mask])) * self.grid.cell_volume)


# -- persistence -----------------------------------------------------------

def save_grid_function(f: GridFunction, path) -> None:
    """Binary layout: magic, dim i32, points i32, extent f64, values f64[points^dim]."""
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<iid", f.grid.dim, f.grid.points, f.grid.extent))
        fh.write(f.values.astype("<f8").tobytes())


def load_grid_function(path) -> GridFunction:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != _MAGIC:
            raise ParameterError(f"not a grid function file (magic {magic!r})")
        dim, points, extent = struct.unpack("<iid", fh.read(16))
        values = np.frombuffer(fh.read(8 * points**dim), dtype="<f8").copy()
    grid = TorusGrid(extent=extent, points=points, dim=dim)
    return GridFunction(grid, values.reshape((points,) * dim))


def save_grid_function_csv(f: GridFunction, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        if f.grid.dim == 1:
            writer.writerow(["x", "value"])
            for x, v in zip(f.grid.axis(), f.values):
                writer.writerow([repr(float(x)), repr(float(v))])
        else:
            writer.writerow(["x1", "x2", "value"])
            xs, ys = f.grid.mesh()
            for x, y, v in zip(xs.ravel(), ys.ravel(), f.values.ravel()):
                writer.writerow([repr(float(x)), repr(float(y)), repr(float(v))])


def load_grid_function_csv(path, grid: TorusGrid) -> GridFunction:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    values = np.array([float(r[-1]) for r in rows[1:]])
    return GridFunction(grid, values.reshape((grid.points,) * grid.dim))
