"""Uniqueness diagnostics built on the density solver.

Three numerical probes of the contraction/regularity arguments behind
uniqueness: the linearized equation satisfied by the difference of two
flows, the smallness of the Duhamel fixed-point map over a short horizon,
and the regularity ladder that upgrades integrability to Holder norms
one ``alpha - 1`` rung at a time.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from stable_ddsde.errors import NumericalError, ParameterError
from stable_ddsde.besov_lp.grid import GridFunction
from stable_ddsde.besov_lp.norms import besov_norm
from stable_ddsde.besov_lp.partition import DyadicPartition
from stable_ddsde.besov_lp.spectral import frac_laplacian, spectral_gradient
from stable_ddsde.fokker_planck.drift import DriftSpec
from stable_ddsde.fokker_planck.flow import DensityFlow
from stable_ddsde.fokker_planck.initial import InitialDensity
from stable_ddsde.fokker_planck.solver import _as_grid_density, _validate, run_splitting
from stable_ddsde.stable_process.kernel import KernelTable, p_alpha

_QUOTIENT_CUT = 1e-14


def _drift_positions(grid):
    mesh = grid.mesh()
    return mesh[0] if grid.dim == 1 else np.stack(mesh, axis=-1)


def _divergence(grid, field: np.ndarray) -> np.ndarray:
    if grid.dim == 1:
        return spectral_gradient(GridFunction(grid, field)).values
    parts = [
        spectral_gradient(GridFunction(grid, field[..., i]), axis=i).values
        for i in range(grid.dim)
    ]
    return sum(parts)


def effective_field(drift: DriftSpec, t: float, flow_a_vals, flow_b_vals, x) -> np.ndarray:
    """The field carrying ``b(rho_a) rho_a - b(rho_b) rho_b`` onto ``u = rho_a - rho_b``.

    ``B = b(rho_a) + rho_b * (b(rho_a) - b(rho_b)) / u`` with 0/0 read as 0.
    """
    u = flow_a_vals - flow_b_vals
    b_a = drift(t, x, flow_a_vals)
    b_b = drift(t, x, flow_b_vals)
    if b_a.ndim > u.ndim:  # vector field: quotient acts componentwise
        u = u[..., None]
        flow_b_vals = flow_b_vals[..., None]
    quot = np.where(np.abs(u) < _QUOTIENT_CUT, 0.0, (b_a - b_b) / np.where(u == 0.0, 1.0, u))
    field = b_a + flow_b_vals * quot
    cap = drift.bound() + drift.lip_u() * float(np.max(np.abs(flow_b_vals)))
    worst = float(np.max(np.abs(field)))
    if worst > cap * (1.0 + 1e-9) + 1e-30:
        raise NumericalError(
            f"effective field {worst:g} exceeds its bound {cap:g}; "
            "the Lipschitz-in-u constant of the drift is inconsistent"
        )
    return field


def linear_duhamel_residual(
    flow_a: DensityFlow, flow_b: DensityFlow, drift: DriftSpec
) -> np.ndarray:
    """L1 defect of ``u = rho_a - rho_b`` against its linear equation, per time.

    The difference of two solutions solves
    ``d/dt u = Delta^(alpha/2) u - div(B u)`` with the effective field ``B``;
    time derivatives are centered at interior times, one-sided at the ends.
    """
    if flow_a.grid != flow_b.grid:
        raise ParameterError("flows live on different grids")
    if len(flow_a.times) != len(flow_b.times) or not np.allclose(
        flow_a.times, flow_b.times, rtol=0.0, atol=1e-12
    ):
        raise ParameterError("flows are sampled at different times")
    if flow_a.alpha != flow_b.alpha:
        raise ParameterError("flows have different stability indices")

    grid = flow_a.grid
    x = _drift_positions(grid)
    times = flow_a.times
    n = len(times)
    u = [a.values - b.values for a, b in zip(flow_a.densities, flow_b.densities)]

    out = np.zeros(n)
    for k in range(n):
        if 0 < k < n - 1:
            dudt = (u[k + 1] - u[k - 1]) / (times[k + 1] - times[k - 1])
        elif k == 0:
            dudt = (u[1] - u[0]) / (times[1] - times[0])
        else:
            dudt = (u[k] - u[k - 1]) / (times[k] - times[k - 1])
        field = effective_field(
            drift, float(times[k]), flow_a.densities[k].values, flow_b.densities[k].values, x
        )
        gen = frac_laplacian(GridFunction(grid, u[k]), flow_a.alpha).values
        if field.ndim > u[k].ndim:
            flux = field * u[k][..., None]
        else:
            flux = field * u[k]
        defect = dudt - gen + _divergence(grid, flux)
        out[k] = float(np.sum(np.abs(defect)) * grid.cell_volume)
    return out


def _flow_sup_distance(a: list[GridFunction], b: list[GridFunction]) -> float:
    return max(float(np.max(np.abs(fa.values - fb.values))) for fa, fb in zip(a, b))


def gronwall_contraction(
    rho0,
    drift: DriftSpec,
    alpha: float,
    horizon: float,
    steps: int,
    grid,
) -> float:
    """Contraction factor of the Duhamel fixed-point map over a short horizon.

    ``Phi`` sends a density flow ``m`` to the linear solve whose drift
    coefficient is frozen on ``m``.  The two probe flows share the same
    start: the pure jump-diffusion flow, and the same flow carrying a
    wiggle at the horizon-adapted frequency ``T^(-1/alpha)``.  That is the
    extremal direction of the gradient-kernel bound (smoother probes decay
    a full power of T faster and underestimate the Lipschitz constant of
    ``Phi``, whose genuine scaling is ``T^((alpha-1)/alpha)``).  Values
    below 1 certify the fixed point is unique on this horizon.
    """
    _validate(drift, alpha, horizon, steps, grid)
    start = _as_grid_density(rho0, grid)
    x = _drift_positions(grid)

    heat, _ = run_splitting(start, lambda k, t, vals: None, alpha, horizon, steps)

    # probe frequency snapped to the frequency lattice of the box
    base = 2.0 * np.pi / grid.extent
    k_star = base * max(1.0, np.round(horizon ** (-1.0 / alpha) / base))
    if k_star > 0.5 * grid.nyquist:
        raise ParameterError(
            f"probe frequency {k_star:g} unresolved; refine the grid or lengthen the horizon"
        )
    axis0 = x if grid.dim == 1 else x[..., 0]
    eps = 1e-3 * float(start.values.max())
    wiggle = eps * np.sin(k_star * axis0)
    perturbed = [heat[0].copy()] + [
        GridFunction(grid, snap.values + wiggle) for snap in heat[1:]
    ]

    def solve_with(coeff: list[GridFunction]) -> list[GridFunction]:
        if drift.bound() == 0.0:
            field_at = lambda k, t, vals: None
        else:
            field_at = lambda k, t, vals: drift(t, x, coeff[k].values)
        snaps, _ = run_splitting(start, field_at, alpha, horizon, steps)
        return snaps

    kappa = _flow_sup_distance(solve_with(heat), solve_with(perturbed)) / eps
    if kappa >= 1.0:
        raise NumericalError(
            f"fixed-point map is not a contraction here (kappa = {kappa:g}); "
            "shorten the horizon or weaken the drift"
        )
    return kappa


@dataclass(frozen=True)
class BootstrapStage:
    """One rung of the regularity ladder."""

    stage: int
    exponent: float
    norm: float


def bootstrap_regularity(
    flow: DensityFlow, beta0: float, stages: int
) -> list[BootstrapStage]:
    """Holder-norm ladder ``sup_t ||rho_t||_{C^{min(k(alpha-1), beta0)}}``.

    Each rung raises the exponent by ``alpha - 1`` until it saturates at
    ``beta0``; all rungs must stay finite for the strong-uniqueness
    argument to close.
    """
    alpha = flow.alpha
    if not (1.0 - alpha / 2.0) < beta0 < 1.0:
        raise ParameterError(
            f"beta0 must lie in (1 - alpha/2, 1) = ({1.0 - alpha / 2.0:g}, 1), got {beta0}"
        )
    needed = int(np.ceil(beta0 / (alpha - 1.0)))
    if stages < needed:
        raise ParameterError(f"need at least {needed} stages to reach exponent {beta0}")

    j_max = int(np.floor(np.log2(flow.grid.nyquist))) - 1
    part = DyadicPartition(flow.grid, j_max)
    out = []
    for k in range(1, stages + 1):
        exponent = min(k * (alpha - 1.0), beta0)
        norm = max(
            besov_norm(snap, exponent, np.inf, np.inf, part).total
            for snap in flow.densities
        )
        if norm > 1e6:
            raise NumericalError(
                f"stage {k} norm {norm:g} blew up; the flow left the Holder class"
            )
        out.append(BootstrapStage(stage=k, exponent=exponent, norm=norm))
    assert out[-1].exponent == beta0
    return out


def lq_density_bound(flow: DensityFlow, q: float) -> np.ndarray:
    """``||rho_t||_q * t^(d (q-1) / (alpha q))`` per stored time."""
    if not 1.0 < q < np.inf:
        raise ParameterError(f"q must lie in (1, inf), got {q}")
    d = flow.grid.dim
    rate = d * (q - 1.0) / (flow.alpha * q)
    return np.array(
        [snap.lp_norm(q) * t**rate for t, snap in zip(flow.times, flow.densities)]
    )


def pde_domination_constant(
    flow: DensityFlow, table: KernelTable, center=0.0, *, images: int = 3
) -> float:
    """Smallest C with ``rho_t <= C * p_alpha(t, . - center)`` over the flow.

    The comparison kernel is periodized onto the torus; the t = 0 snapshot
    is skipped (a mollified point mass against a delta has no finite ratio).
    """
    grid = flow.grid
    mesh = grid.mesh()
    center = np.broadcast_to(np.asarray(center, dtype=float), (grid.dim,))
    shifts = range(-images, images + 1)
    worst = 0.0
    for t, snap in zip(flow.times, flow.densities):
        if t <= 0.0:
            continue
        target = np.zeros_like(snap.values)
        if grid.dim == 1:
            for n in shifts:
                target += p_alpha(t, np.abs(mesh[0] - center[0] + n * grid.extent), table)
        else:
            for nx in shifts:
                for ny in shifts:
                    r = np.hypot(
                        mesh[0] - center[0] + nx * grid.extent,
                        mesh[1] - center[1] + ny * grid.extent,
                    )
                    target += p_alpha(t, r, table)
        worst = max(worst, float(np.max(snap.values / target)))
    return worst
