"""Torus grids, dyadic frequency decomposition, Besov/Hoelder norms and
spectral nonlocal operators.

Everything lives on a uniform periodic grid; Fourier multipliers are
exact on the resolved frequencies, so the only discretization error in
this module is quadrature of pointwise norms and the finite frequency
budget.
"""

from stable_ddsde.besov_lp.grid import (
    GridFunction,
    TorusGrid,
    load_grid_function,
    load_grid_function_csv,
    save_grid_function,
    save_grid_function_csv,
)
from stable_ddsde.besov_lp.partition import DyadicPartition, block, block_window, build_partition
from stable_ddsde.besov_lp.norms import (
    BesovProfile,
    besov_norm,
    holder_norm,
    holder_quotient,
    log_lipschitz_constant,
)
from stable_ddsde.besov_lp.spectral import frac_laplacian, heat_propagate, spectral_gradient
from stable_ddsde.besov_lp.schauder import (
    SchauderReport,
    lp_decay_profile,
    lp_heat_integral,
    random_band_limited,
    schauder_constant,
)

__all__ = [
    "TorusGrid",
    "GridFunction",
    "save_grid_function",
    "load_grid_function",
    "save_grid_function_csv",
    "load_grid_function_csv",
    "DyadicPartition",
    "build_partition",
    "block",
    "block_window",
    "BesovProfile",
    "besov_norm",
    "holder_norm",
    "holder_quotient",
    "log_lipschitz_constant",
    "frac_laplacian",
    "spectral_gradient",
    "heat_propagate",
    "SchauderReport",
    "lp_decay_profile",
    "lp_heat_integral",
    "random_band_limited",
    "schauder_constant",
]
