"""Exact sampling of stable increments by Gaussian subordination.

A one-sided stable variable ``S`` with Laplace transform
``E exp(-lam S) = exp(-lam**sigma)``, ``sigma in (0,1)``, is drawn with
Kanter's representation.  An isotropic increment over a window ``dt``
is then ``dt**(1/alpha) * sqrt(2 S) * Z`` with ``sigma = alpha/2`` and
``Z`` standard d-dimensional Gaussian:

    E exp(i xi . sqrt(2 S) Z) = E exp(-S |xi|^2) = exp(-|xi|^alpha),

so the characteristic function is exactly ``exp(-dt |xi|^alpha)``.
"""

from __future__ import annotations

import numpy as np

from stable_ddsde.errors import ParameterError
from stable_ddsde.rng import RngStream
from stable_ddsde.stable_process.params import StableParams


def sample_one_sided_stable(index: float, rng: RngStream, size=None) -> np.ndarray:
    """Draw positive stable variables with ``E exp(-lam S) = exp(-lam**index)``.

    Kanter's method: with ``U ~ Uniform(0, pi)`` and ``W ~ Exp(1)``,

        B(u) = [sin(index*u)**index * sin((1-index)*u)**(1-index) / sin(u)]**(1/(1-index))
        S    = (B(U) / W)**((1-index)/index)

    ``size=None`` returns a scalar array; any numpy shape is accepted.
    """
    sigma = float(index)
    if not 0.0 < sigma < 1.0:
        raise ParameterError(f"one-sided stable index must lie in (0, 1), got {sigma}")
    u = rng.uniform(0.0, np.pi, size)
    w = rng.exponential(1.0, size)
    # Log-domain evaluation keeps the formula stable for u near 0 or pi.
    log_b = (
        sigma * np.log(np.sin(sigma * u))
        + (1.0 - sigma) * np.log(np.sin((1.0 - sigma) * u))
        - np.log(np.sin(u))
    ) / (1.0 - sigma)
    log_s = (1.0 - sigma) / sigma * (log_b - np.log(w))
    return np.exp(log_s)


def sample_increment(dt: float, params: StableParams, rng: RngStream, size=None) -> np.ndarray:
    """Draw increments of the isotropic alpha-stable process over ``dt``.

    Returns shape ``(d,)`` for ``size=None``, else ``size + (d,)``.
    At ``alpha == 2`` (extended oracle range) the subordinator is the
    constant 1 and the increment is the Gaussian with the matching
    characteristic function ``exp(-dt |xi|^2)``.
    """
    if not dt > 0.0:
        raise ParameterError(f"dt must be positive, got {dt}")
    alpha, d = params.alpha, params.d
    if size is None:
        shape: tuple[int, ...] = ()
    elif isinstance(size, (int, np.integer)):
        shape = (int(size),)
    else:
        shape = tuple(int(n) for n in size)
    z = rng.normal(0.0, 1.0, shape + (d,))
    if alpha == 2.0:
        s = np.ones(shape)
    else:
        s = sample_one_sided_stable(alpha / 2.0, rng, shape if shape else None)
        s = np.asarray(s)
    scale = dt ** (1.0 / alpha) * np.sqrt(2.0 * s)
    return scale[..., np.newaxis] * z if shape else scale * z
