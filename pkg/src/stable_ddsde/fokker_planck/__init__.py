"""Reference density flows: nonlinear nonlocal Fokker-Planck solver and
the uniqueness diagnostics built on top of it."""

from stable_ddsde.fokker_planck.drift import ZERO_DRIFT, DriftSpec
from stable_ddsde.fokker_planck.initial import InitialDensity
from stable_ddsde.fokker_planck.flow import DensityFlow, load_flow, save_flow
from stable_ddsde.fokker_planck.solver import nfp_solve
from stable_ddsde.fokker_planck.diagnostics import (
    BootstrapStage,
    bootstrap_regularity,
    effective_field,
    gronwall_contraction,
    linear_duhamel_residual,
    lq_density_bound,
    pde_domination_constant,
)

__all__ = [
    "ZERO_DRIFT",
    "DriftSpec",
    "InitialDensity",
    "DensityFlow",
    "load_flow",
    "save_flow",
    "nfp_solve",
    "BootstrapStage",
    "bootstrap_regularity",
    "effective_field",
    "gronwall_contraction",
    "linear_duhamel_residual",
    "lq_density_bound",
    "pde_domination_constant",
]
