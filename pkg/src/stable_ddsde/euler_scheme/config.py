"""Run configuration for the density-plug-in particle scheme."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from stable_ddsde.errors import ParameterError
from stable_ddsde.fokker_planck.drift import DriftSpec
from stable_ddsde.fokker_planck.initial import InitialDensity


@dataclass(frozen=True)
class EulerConfig:
    """Everything a particle run depends on, seeds included.

    ``bandwidth`` is either the string ``"silverman"`` or a fixed positive
    width.  ``h = horizon / n_steps`` is the scheme step; the drift bound
    must satisfy ``h * sup|b| <= 1`` so single-step displacements stay
    comparable to the noise scale.
    """

    horizon: float = 1.0
    n_steps: int = 128
    n_particles: int = 100_000
    bandwidth: object = "silverman"
    seed: int = 0
    drift: DriftSpec = field(default_factory=DriftSpec)
    alpha: float = 1.5
    dim: int = 1
    initial: InitialDensity = field(default_factory=InitialDensity)

    def __post_init__(self) -> None:
        if not self.horizon > 0.0:
            raise ParameterError(f"horizon must be positive, got {self.horizon}")
        if self.n_steps < 2:
            raise ParameterError(f"n_steps must be >= 2, got {self.n_steps}")
        if self.n_particles < 1_000:
            raise ParameterError(
                f"n_particles must be >= 1000, got {self.n_particles}"
            )
        if not 1.0 < self.alpha < 2.0:
            raise ParameterError(f"alpha must lie in (1, 2), got {self.alpha}")
        if self.dim not in (1, 2):
            raise ParameterError(f"dim must be 1 or 2, got {self.dim}")
        if isinstance(self.bandwidth, str):
            if self.bandwidth != "silverman":
                raise ParameterError(
                    f"bandwidth must be 'silverman' or a positive number, got {self.bandwidth!r}"
                )
        elif not float(self.bandwidth) > 0.0:
            raise ParameterError(f"fixed bandwidth must be positive, got {self.bandwidth}")
        if self.step * self.drift.bound() > 1.0:
            raise ParameterError(
                f"h * sup|b| = {self.step * self.drift.bound():g} exceeds 1; "
                "increase n_steps"
            )

    @property
    def step(self) -> float:
        return self.horizon / self.n_steps

    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.horizon, self.n_steps + 1)
