"""Isotropic alpha-stable process: sampling, heat kernel, kernel bounds.

Normalization: the process is pinned by its characteristic function
``E exp(i xi . L_t) = exp(-t |xi|^alpha)`` exactly; every density,
gradient and bound in this package refers to that normalization.
"""

from stable_ddsde.stable_process.params import StableParams
from stable_ddsde.stable_process.sampling import (
    sample_increment,
    sample_one_sided_stable,
)
from stable_ddsde.stable_process.kernel import (
    KernelTable,
    build_kernel_table,
    grad_p_alpha,
    kernel_profile_quadrature,
    load_kernel_table,
    p_alpha,
    rho_alpha,
    save_kernel_table,
    stable_tail_constant,
)
from stable_ddsde.stable_process.bounds import (
    KernelBoundReport,
    ck_defect,
    heat_equation_residual,
    kernel_bound_report,
)

__all__ = [
    "StableParams",
    "sample_increment",
    "sample_one_sided_stable",
    "KernelTable",
    "build_kernel_table",
    "load_kernel_table",
    "save_kernel_table",
    "kernel_profile_quadrature",
    "stable_tail_constant",
    "p_alpha",
    "grad_p_alpha",
    "rho_alpha",
    "KernelBoundReport",
    "kernel_bound_report",
    "ck_defect",
    "heat_equation_residual",
]
