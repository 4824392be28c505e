"""Drift fields ``b(t, x, u)`` with queryable constants.

Every drift carries its sup bound, its Lipschitz constant in the density
argument and its spatial Hoelder data, because the uniqueness and
contraction diagnostics consume those constants rather than re-deriving
them numerically.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from stable_ddsde.errors import ParameterError

_SPATIAL = ("sin", "cos", "smoothed_sign")
_ENVELOPES = ("tanh", "clamp01")
_KINDS = ("product", "saturated_linear", "constant", "vector")


def _g_eval(name: str, omega: float, beta0: float, x: np.ndarray) -> np.ndarray:
    s = np.sin(omega * x)
    if name == "sin":
        return s
    if name == "cos":
        return np.cos(omega * x)
    return np.sign(s) * np.abs(s) ** beta0


def _h_eval(name: str, u: np.ndarray) -> np.ndarray:
    if name == "tanh":
        return np.tanh(u)
    return np.clip(u, 0.0, 1.0)


@dataclass(frozen=True)
class DriftSpec:
    """Drift ``b(t, x, u)``; time enters only through the signature.

    kinds:
      - ``product``: ``A * g(x) * h(u)``, ``g`` in sin | cos | smoothed_sign,
        ``h`` in tanh | clamp01; ``smoothed_sign`` is
        ``sign(sin(wx)) |sin(wx)|^beta0``, the C^beta0 member of the family.
      - ``saturated_linear``: ``A * u / (1 + |u|)``, no x dependence.
      - ``constant``: ``A``.
      - ``vector``: one component spec per coordinate for d > 1.
    """

    kind: str = "product"
    amplitude: float = 0.5
    spatial: str = "sin"
    envelope: str = "tanh"
    wave_number: float = 2.0 * np.pi / 80.0
    holder_exponent: float = 0.8
    components: tuple["DriftSpec", ...] = ()

    def __post_init__(self) -> None:
        if self.kind not in _KINDS:
            raise ParameterError(f"unknown drift kind {self.kind!r}")
        if self.kind == "vector":
            if len(self.components) < 2:
                raise ParameterError("vector drift needs one component spec per coordinate")
            if any(c.kind == "vector" for c in self.components):
                raise ParameterError("vector drift components must be scalar kinds")
            return
        if self.kind == "product":
            if self.spatial not in _SPATIAL:
                raise ParameterError(f"spatial factor must be one of {_SPATIAL}, got {self.spatial!r}")
            if self.envelope not in _ENVELOPES:
                raise ParameterError(f"envelope must be one of {_ENVELOPES}, got {self.envelope!r}")
            if not self.wave_number > 0.0:
                raise ParameterError(f"wave_number must be positive, got {self.wave_number}")
            if self.spatial == "smoothed_sign" and not 0.0 < self.holder_exponent <= 1.0:
                raise ParameterError(
                    f"holder_exponent must lie in (0, 1], got {self.holder_exponent}"
                )

    # -- evaluation ---------------------------------------------------------
    def __call__(self, t: float, x: np.ndarray, u: np.ndarray) -> np.ndarray:
        """Vectorized drift value; for ``vector`` kind the last axis of x is d."""
        x = np.asarray(x, dtype=float)
        u = np.asarray(u, dtype=float)
        if self.kind == "vector":
            cols = [c(t, x[..., i], u) for i, c in enumerate(self.components)]
            return np.stack(cols, axis=-1)
        if self.kind == "constant":
            return np.full(np.broadcast(x, u).shape, self.amplitude)
        if self.kind == "saturated_linear":
            return self.amplitude * u / (1.0 + np.abs(u))
        g = _g_eval(self.spatial, self.wave_number, self.holder_exponent, x)
        return self.amplitude * g * _h_eval(self.envelope, u)

    # -- queryable constants ------------------------------------------------
    def bound(self) -> float:
        """``sup |b|`` over all arguments."""
        if self.kind == "vector":
            return float(np.sqrt(sum(c.bound() ** 2 for c in self.components)))
        return abs(self.amplitude)

    def lip_u(self) -> float:
        """Lipschitz constant of ``u -> b(t, x, u)``, uniform in (t, x)."""
        if self.kind == "vector":
            return max(c.lip_u() for c in self.components)
        if self.kind == "constant":
            return 0.0
        return abs(self.amplitude)

    def space_exponent(self) -> float:
        """Hoelder exponent of ``x -> b(t, x, u)``; 1.0 for Lipschitz kinds."""
        if self.kind == "vector":
            return min(c.space_exponent() for c in self.components)
        if self.kind == "product" and self.spatial == "smoothed_sign":
            return self.holder_exponent
        return 1.0

    def holder_x_norm(self) -> float:
        """Upper bound on ``sup_(t,u) ||b(t, ., u)||_C^beta0``.

        For the trigonometric factors ``|g(x)-g(y)| <= min(2, w|x-y|)`` gives
        seminorm ``2^(1-beta) w^beta``; the sign-power factor obeys the same
        bound with the exponent beta0.
        """
        if self.kind == "vector":
            return max(c.holder_x_norm() for c in self.components)
        if self.kind in ("constant", "saturated_linear"):
            return abs(self.amplitude)
        beta = self.space_exponent()
        seminorm = 2.0 ** (1.0 - beta) * self.wave_number**beta
        return abs(self.amplitude) * (1.0 + seminorm)

    def is_periodic_on(self, extent: float) -> bool:
        """Whether the spatial factor has a whole number of periods in the box."""
        if self.kind == "vector":
            return all(c.is_periodic_on(extent) for c in self.components)
        if self.kind != "product":
            return True
        cycles = self.wave_number * extent / (2.0 * np.pi)
        return abs(cycles - round(cycles)) < 1e-9


ZERO_DRIFT = DriftSpec(kind="constant", amplitude=0.0)
