"""Parameters of the driving isotropic stable process."""

from __future__ import annotations

from dataclasses import dataclass

from stable_ddsde.errors import ParameterError

SUPPORTED_DIMS = (1, 2, 3)


@dataclass(frozen=True)
class StableParams:
    """Stability index and dimension of the driving noise.

    The production range is ``alpha in (1, 2)``; ``extended=True`` widens
    it to ``(0, 2]`` so closed-form endpoints (Cauchy at alpha=1, Gaussian
    at alpha=2) stay available as oracles.
    """

    alpha: float
    d: int = 1
    extended: bool = False

    def __post_init__(self) -> None:
        if not isinstance(self.d, (int,)) or self.d not in SUPPORTED_DIMS:
            raise ParameterError(f"d must be one of {SUPPORTED_DIMS}, got {self.d!r}")
        a = float(self.alpha)
        if self.extended:
            if not 0.0 < a <= 2.0:
                raise ParameterError(f"alpha must lie in (0, 2] with extended=True, got {a}")
        else:
            if not 1.0 < a < 2.0:
                raise ParameterError(f"alpha must lie in (1, 2), got {a}")
        object.__setattr__(self, "alpha", a)
