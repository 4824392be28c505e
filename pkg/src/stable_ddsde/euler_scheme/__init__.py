"""Density-plug-in Euler particle scheme and its diagnostics."""

from stable_ddsde.euler_scheme.config import EulerConfig
from stable_ddsde.euler_scheme.ensemble import (
    ParticleEnsemble,
    cic_deposit,
    interp_at_positions,
)
from stable_ddsde.euler_scheme.kde import kde_estimate, resolve_bandwidth
from stable_ddsde.euler_scheme.scheme import run_euler
from stable_ddsde.euler_scheme.duhamel import duhamel_density_mc, point_particle_kde
from stable_ddsde.euler_scheme.reports import (
    ConvergenceRow,
    ConvergenceTable,
    DominationReport,
    HolderReport,
    UniquenessReport,
    convergence_study,
    domination_report,
    flow_error_against,
    holder_report,
    initial_quantile_stencil,
    mixture_density,
    uniqueness_consistency,
)

__all__ = [
    "EulerConfig",
    "ParticleEnsemble",
    "cic_deposit",
    "interp_at_positions",
    "kde_estimate",
    "resolve_bandwidth",
    "run_euler",
    "duhamel_density_mc",
    "point_particle_kde",
    "ConvergenceRow",
    "ConvergenceTable",
    "DominationReport",
    "HolderReport",
    "UniquenessReport",
    "convergence_study",
    "domination_report",
    "flow_error_against",
    "holder_report",
    "initial_quantile_stencil",
    "mixture_density",
    "uniqueness_consistency",
]
