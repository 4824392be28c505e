"""Dyadic partition of unity in frequency and the induced block operators.

The low-pass profile is built from the standard smooth step

    g(s) = exp(-1/s) for s > 0, else 0
    chi(|xi|) = g(3/2 - |xi|) / (g(3/2 - |xi|) + g(|xi| - 1))

so ``chi = 1`` on ``|xi| <= 1`` and ``chi = 0`` on ``|xi| >= 3/2``.  The
annulus profiles ``psi_j(xi) = chi(2^-j xi) - chi(2^-(j-1) xi)`` telescope
exactly, which is what makes the partition identity a 1e-12 statement
rather than an approximation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from stable_ddsde.errors import ParameterError
from stable_ddsde.besov_lp.grid import GridFunction, TorusGrid


def _smooth_step_raw(s: np.ndarray) -> np.ndarray:
    out = np.zeros_like(s)
    pos = s > 0.0
    out[pos] = np.exp(-1.0 / s[pos])
    return out


def chi_profile(r) -> np.ndarray:
    """Radial low-pass profile: 1 on [0,1], 0 on [3/2,inf), smooth between."""
    r = np.asarray(r, dtype=float)
    up = _smooth_step_raw(1.5 - r)
    down = _smooth_step_raw(r - 1.0)
    with np.errstate(invalid="ignore"):
        out = np.where(up + down > 0.0, up / np.where(up + down > 0.0, up + down, 1.0), 0.0)
    out = np.where(r <= 1.0, 1.0, out)
    out = np.where(r >= 1.5, 0.0, out)
    return out


def psi_profile(r, j: int) -> np.ndarray:
    """Annulus profile at scale ``2^j``; supported on ``2^(j-1) < |xi| < 3*2^(j-1)``."""
    r = np.asarray(r, dtype=float)
    return chi_profile(r / 2.0**j) - chi_profile(r / 2.0 ** (j - 1))


@dataclass
class DyadicPartition:
    """Cached block multipliers on one grid, blocks ``j = -1 .. j_max``.

    Block -1 is the low-pass ``chi(2|xi|)``; block ``j >= 0`` is the
    annulus ``psi_j``.  One extra annulus ``j_max + 1`` is kept so the
    enlarged blocks ``R~_j`` exist for every stored ``j``.
    """

    grid: TorusGrid
    j_max: int
    _multipliers: dict = field(init=False, repr=False, default_factory=dict)

    def __post_init__(self) -> None:
        if self.j_max < 1:
            raise ParameterError(f"j_max must be >= 1, got {self.j_max}")
        need = 2.0 ** (self.j_max + 1)
        if self.grid.nyquist < need:
            limit = int(np.floor(np.log2(self.grid.nyquist))) - 1
            raise ParameterError(
                f"grid Nyquist {self.grid.nyquist:.1f} cannot hold j_max={self.j_max} "
                f"(needs >= 2^(j_max+1) = {need:.0f}); largest admissible j_max is {limit}"
            )
        freq = self.grid.freq_norm()
        # chi(2|xi|) is the telescoping partner of psi_0 = chi(|xi|) - chi(2|xi|)
        self._multipliers[-1] = chi_profile(2.0 * freq)
        for j in range(0, self.j_max + 2):
            self._multipliers[j] = psi_profile(freq, j)

    @property
    def blocks(self) -> range:
        return range(-1, self.j_max + 1)

    def multiplier(self, j: int) -> np.ndarray:
        if j == -2:
            return np.zeros_like(self._multipliers[-1])
        if j not in self._multipliers:
            raise ParameterError(f"block index {j} outside [-1, {self.j_max + 1}]")
        return self._multipliers[j]

    def window_multiplier(self, j: int) -> np.ndarray:
        """Multiplier of the enlarged block ``R_(j-1) + R_j + R_(j+1)``."""
        return self.multiplier(j - 1) + self.multiplier(j) + self.multiplier(j + 1)


def build_partition(grid: TorusGrid, j_max: int = 8) -> DyadicPartition:
    return DyadicPartition(grid=grid, j_max=j_max)


def _apply_multiplier(f: GridFunction, mult: np.ndarray) -> GridFunction:
    spec = np.fft.fftn(f.values)
    out = np.fft.ifftn(mult * spec).real
    return GridFunction(f.grid, out)


def block(f: GridFunction, j: int, part: DyadicPartition) -> GridFunction:
    """Littlewood-Paley block ``R_j f`` (j = -1 is the low-pass block)."""
    if f.grid != part.grid:
        raise ParameterError("function and partition live on different grids")
    if not -1 <= j <= part.j_max:
        raise ParameterError(f"block index must lie in [-1, {part.j_max}], got {j}")
    return _apply_multiplier(f, part.multiplier(j))


def block_window(f: GridFunction, j: int, part: DyadicPartition) -> GridFunction:
    """Enlarged block ``R~_j f = (R_(j-1) + R_j + R_(j+1)) f``; ``R_-2 = 0``."""
    if f.grid != part.grid:
        raise ParameterError("function and partition live on different grids")
    if not -1 <= j <= part.j_max:
        raise ParameterError(f"block index must lie in [-1, {part.j_max}], got {j}")
    return _apply_multiplier(f, part.window_multiplier(j))
