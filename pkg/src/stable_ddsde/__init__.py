"""Numerical laboratory for density dependent SDEs driven by isotropic
alpha-stable noise, alpha in (1, 2).

Subpackages:

- ``stable_process``: increment sampling, heat-kernel tables, kernel bounds.
- ``besov_lp``: torus grids, dyadic frequency decomposition, Besov norms,
  spectral fractional Laplacian and heat propagation.
- ``fokker_planck``: nonlinear Fokker-Planck solver and uniqueness-style
  diagnostics (contraction, bootstrap, Lq bounds).
- ``euler_scheme``: density plug-in Euler-Maruyama particle scheme, KDE,
  Duhamel Monte Carlo density representation, convergence reports.
- ``harness``: experiment configs, run records, CLI.
"""

from stable_ddsde.errors import ConfigError, NumericalError, ParameterError
from stable_ddsde.rng import RngStream

__all__ = [
    "ConfigError",
    "NumericalError",
    "ParameterError",
    "RngStream",
]

__version__ = "0.1.0"
