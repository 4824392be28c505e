"""Initial densities: grid projections and particle samplers from one spec."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from stable_ddsde.errors import ParameterError
from stable_ddsde.besov_lp.grid import GridFunction, TorusGrid
from stable_ddsde.rng import RngStream

_KINDS = ("gaussian_mixture", "uniform_box", "holder_bump")


@dataclass(frozen=True)
class InitialDensity:
    """One spec, two realizations: a normalized grid density and an exact sampler.

    ``holder_bump`` is ``max(0, 1 - |(x-center)/width|^beta0)`` per axis, the
    canonical C^beta0 datum for the strong-uniqueness runs; its regularity
    tag and norm are queryable.  Mixture centers/sigmas are per component;
    for d > 1 each center is a point and sigmas stay isotropic.
    """

    kind: str = "gaussian_mixture"
    weights: tuple = (1.0,)
    centers: tuple = (0.0,)
    sigmas: tuple = (1.0,)
    center: float = 0.0
    width: float = 4.0
    holder_exponent: float = 0.8

    def __post_init__(self) -> None:
        if self.kind not in _KINDS:
            raise ParameterError(f"unknown initial density kind {self.kind!r}")
        if self.kind == "gaussian_mixture":
            if not (len(self.weights) == len(self.centers) == len(self.sigmas)):
                raise ParameterError("weights, centers and sigmas must have equal length")
            if any(w <= 0 for w in self.weights):
                raise ParameterError("mixture weights must be positive")
            if any(s <= 0 for s in self.sigmas):
                raise ParameterError("mixture sigmas must be positive")
        else:
            if not self.width > 0.0:
                raise ParameterError(f"width must be positive, got {self.width}")
        if self.kind == "holder_bump" and not 0.0 < self.holder_exponent < 1.0:
            raise ParameterError(f"holder_exponent must lie in (0, 1), got {self.holder_exponent}")

    def _profile(self, mesh: tuple[np.ndarray, ...]) -> np.ndarray:
        dim = len(mesh)
        if self.kind == "gaussian_mixture":
            total = np.zeros_like(mesh[0])
            wsum = float(sum(self.weights))
            for w, c, s in zip(self.weights, self.centers, self.sigmas):
                cs = np.atleast_1d(np.asarray(c, dtype=float))
                if cs.size != dim:
                    cs = np.full(dim, float(np.ravel(c)[0]))
                q = sum((mesh[i] - cs[i]) ** 2 for i in range(dim))
                total += (w / wsum) * np.exp(-0.5 * q / s**2) / (2.0 * np.pi * s**2) ** (dim / 2.0)
            return total
        half = 0.5 * self.width
        if self.kind == "uniform_box":
            out = np.ones_like(mesh[0])
            for ax in mesh:
                out = out * (np.abs(ax - self.center) <= half)
            return out
        out = np.ones_like(mesh[0])
        for ax in mesh:
            out = out * np.maximum(0.0, 1.0 - np.abs((ax - self.center) / half) ** self.holder_exponent)
        return out

    def on_grid(self, grid: TorusGrid) -> GridFunction:
        """Nonnegative grid density normalized to unit mass."""
        vals = self._profile(grid.mesh())
        mass = float(np.sum(vals) * grid.cell_volume)
        if not mass > 0.0:
            raise ParameterError("initial density vanishes on this grid")
        return GridFunction(grid, vals / mass)

    def sample(self, rng: RngStream, n: int, dim: int = 1) -> np.ndarray:
        """n exact draws, shape (n,) for dim=1 else (n, dim)."""
        if n < 1:
            raise ParameterError(f"n must be >= 1, got {n}")
        if self.kind == "gaussian_mixture":
            w = np.asarray(self.weights, dtype=float)
            idx = rng.choice(len(w), size=n, p=w / w.sum())
            centers = np.array(
                [np.resize(np.atleast_1d(np.asarray(c, dtype=float)), dim) for c in self.centers]
            )
            sig = np.asarray(self.sigmas, dtype=float)[idx]
            out = centers[idx] + sig[:, None] * rng.normal(0.0, 1.0, (n, dim))
        elif self.kind == "uniform_box":
            out = self.center + self.width * (rng.uniform(size=(n, dim)) - 0.5)
        else:
            out = self._sample_bump(rng, n, dim)
        return out[:, 0] if dim == 1 else out

    def _sample_bump(self, rng: RngStream, n: int, dim: int) -> np.ndarray:
        half = 0.5 * self.width
        out = np.empty((n, dim))
        filled = 0
        while filled < n:
            m = 2 * (n - filled) + 16
            cand = self.center + half * (2.0 * rng.uniform(size=(m, dim)) - 1.0)
            dens = np.prod(
                np.maximum(0.0, 1.0 - np.abs((cand - self.center) / half) ** self.holder_exponent),
                axis=1,
            )
            keep = cand[rng.uniform(size=m) < dens]
            take = min(len(keep), n - filled)
            out[filled : filled + take] = keep[:take]
            filled += take
        return out

    def holder_norm_bound(self) -> float:
        """Upper bound on the C^beta0 norm of the unnormalized bump profile."""
        if self.kind != "holder_bump":
            raise ParameterError("holder_norm_bound applies to holder_bump only")
        half = 0.5 * self.width
        return 1.0 + half ** (-self.holder_exponent)
