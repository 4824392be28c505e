"""Particle clouds on R^d and their deposition onto analysis grids.

Particles are never wrapped: the heavy-tailed increments legitimately
leave any finite box, and reflecting or folding them would corrupt the
law.  Only grid deposits are windowed, and every deposit reports the
escaped fraction so callers can certify the truncation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from stable_ddsde.errors import ParameterError
from stable_ddsde.besov_lp.grid import GridFunction, TorusGrid
from stable_ddsde.rng import RngStream


@dataclass
class ParticleEnsemble:
    """Positions of ``n`` particles at one time, with their noise stream."""

    time: float
    positions: np.ndarray  # (n, dim)
    rng: RngStream

    def __post_init__(self) -> None:
        self.positions = np.asarray(self.positions, dtype=float)
        if self.positions.ndim != 2:
            raise ParameterError("positions must have shape (n, dim)")
        if not np.all(np.isfinite(self.positions)):
            raise ParameterError("particle positions must be finite")

    @property
    def n(self) -> int:
        return self.positions.shape[0]

    @property
    def dim(self) -> int:
        return self.positions.shape[1]


def cic_deposit(
    grid: TorusGrid, positions: np.ndarray, weights: np.ndarray | None = None
) -> tuple[np.ndarray, float]:
    """Cloud-in-cell deposit of (weighted) points onto the grid.

    Each in-box point splits linearly between its two (four in 2-D)
    nearest cells.  Returns the cell array and the fraction of total
    absolute weight that fell outside the box and was dropped.
    """
    positions = np.atleast_2d(np.asarray(positions, dtype=float))
    n, d = positions.shape
    if d != grid.dim:
        raise ParameterError(f"positions have dim {d}, grid has dim {grid.dim}")
    w = np.ones(n) if weights is None else np.asarray(weights, dtype=float)
    m = grid.points
    xi = (positions + 0.5 * grid.extent) / grid.spacing
    inside = np.all((xi >= 0.0) & (xi < m), axis=1)
    total = float(np.sum(np.abs(w)))
    lost = 0.0 if total == 0.0 else float(np.sum(np.abs(w[~inside]))) / total

    xi = xi[inside]
    w = w[inside]
    i0 = np.floor(xi).astype(np.int64)
    frac = xi - i0
    out = np.zeros((m,) * grid.dim)
    if grid.dim == 1:
        np.add.at(out, i0[:, 0], w * (1.0 - frac[:, 0]))
        np.add.at(out, (i0[:, 0] + 1) % m, w * frac[:, 0])
    else:
        ix, iy = i0[:, 0], i0[:, 1]
        fx, fy = frac[:, 0], frac[:, 1]
        np.add.at(out, (ix, iy), w * (1 - fx) * (1 - fy))
        np.add.at(out, ((ix + 1) % m, iy), w * fx * (1 - fy))
        np.add.at(out, (ix, (iy + 1) % m), w * (1 - fx) * fy)
        np.add.at(out, ((ix + 1) % m, (iy + 1) % m), w * fx * fy)
    return out, lost


def interp_at_positions(f: GridFunction, positions: np.ndarray) -> np.ndarray:
    """Linear interpolation of a grid function at points of R^d; 0 outside."""
    positions = np.atleast_2d(np.asarray(positions, dtype=float))
    grid = f.grid
    m = grid.points
    xi = (positions + 0.5 * grid.extent) / grid.spacing
    inside = np.all((xi >= 0.0) & (xi <= m - 1.0), axis=1)
    i0 = np.clip(np.floor(xi).astype(np.int64), 0, m - 2)
    frac = xi - i0
    if grid.dim == 1:
        v = f.values
        vals = v[i0[:, 0]] * (1 - frac[:, 0]) + v[i0[:, 0] + 1] * frac[:, 0]
    else:
        v = f.values
        ix, iy = i0[:, 0], i0[:, 1]
        fx, fy = frac[:, 0], frac[:, 1]
        vals = (
            v[ix, iy] * (1 - fx) * (1 - fy)
            + v[ix + 1, iy] * fx * (1 - fy)
            + v[ix, iy + 1] * (1 - fx) * fy
            + v[ix + 1, iy + 1] * fx * fy
        )
    return np.where(inside, vals, 0.0)
