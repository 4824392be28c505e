"""Empirical constants and convergence tables for particle runs.

Every report normalizes by the mixture density: the free kernel averaged
over the initial law.  That is the object the two-sided bounds and the
Hölder estimates are stated against, and it is computable here as one
FFT convolution per time.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from stable_ddsde.errors import NumericalError, ParameterError
from stable_ddsde.besov_lp.grid import GridFunction, TorusGrid
from stable_ddsde.euler_scheme.config import EulerConfig
from stable_ddsde.euler_scheme.scheme import run_euler
from stable_ddsde.fokker_planck.flow import DensityFlow
from stable_ddsde.fokker_planck.initial import InitialDensity
from stable_ddsde.stable_process.kernel import KernelTable, build_kernel_table, p_alpha


def _periodized_kernel(grid: TorusGrid, t: float, table: KernelTable, images: int = 3) -> np.ndarray:
    mesh = grid.mesh()
    out = np.zeros((grid.points,) * grid.dim)
    shifts = range(-images, images + 1)
    if grid.dim == 1:
        for n in shifts:
            out += p_alpha(t, np.abs(mesh[0] + n * grid.extent), table)
    else:
        for nx in shifts:
            for ny in shifts:
                r = np.hypot(mesh[0] + nx * grid.extent, mesh[1] + ny * grid.extent)
                out += p_alpha(t, r, table)
    return out


def mixture_density(
    base: GridFunction, t: float, table: KernelTable, images: int = 3
) -> np.ndarray:
    """``integral p_alpha(t, x - .) base(dx)`` by periodic FFT convolution."""
    grid = base.grid
    kernel = _periodized_kernel(grid, t, table, images)
    conv = np.fft.ifftn(
        np.fft.fftn(base.values) * np.fft.fftn(np.fft.ifftshift(kernel))
    ).real
    return np.maximum(conv * grid.cell_volume, 1e-300)


def initial_quantile_stencil(
    initial: InitialDensity, grid: TorusGrid, n_points: int = 5
) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes in quantile space of the initial density.

    Returns ``(points, weights)`` with the weights summing to one, so
    that ``sum_i w_i f(x_i)`` approximates ``integral f d mu_0``.  Only
    one-dimensional initial laws have a quantile function.
    """
    if grid.dim != 1:
        raise ParameterError("quantile stencils are one-dimensional")
    if n_points < 1:
        raise ParameterError(f"n_points must be >= 1, got {n_points}")
    nodes, gl_weights = np.polynomial.legendre.leggauss(n_points)
    quantiles = 0.5 * (nodes + 1.0)
    dens = initial.on_grid(grid).values
    cdf = np.cumsum(dens) * grid.spacing
    points = np.interp(quantiles, cdf, grid.axis())
    return points, 0.5 * gl_weights


@dataclass(frozen=True)
class DominationReport:
    """Per-time least constants C(t) with rho_t <= C(t) * mixture(t)."""

    times: np.ndarray
    constants: np.ndarray

    @property
    def sup(self) -> float:
        return float(np.max(self.constants))


def domination_report(
    flow: DensityFlow,
    initial: InitialDensity,
    table: KernelTable,
    *,
    density_floor: float = 2e-3,
) -> DominationReport:
    """Ratio of each snapshot to the free-kernel mixture started from mu_0.

    t = 0 is skipped; a density against a point comparison has no finite
    ratio there.  The max is taken over grid points where the mixture is
    at least ``density_floor``: below that level a kernel estimate built
    from finitely many particles carries no signal, and the quotient
    measures shot noise rather than domination.  A single stray particle
    deposits a bump of height 1/(n w sqrt(2 pi)), about 2e-4 at n = 1e5
    and bandwidth 0.02; the default floor sits a factor 10 above that.
    """
    if not density_floor > 0.0:
        raise ParameterError(f"density_floor must be positive, got {density_floor}")
    base = initial.on_grid(flow.grid)
    times, consts = [], []
    for t, snap in zip(flow.times, flow.densities):
        if t <= 0.0:
            continue
        mix = mixture_density(base, float(t), table)
        resolved = mix >= density_floor
        c = float(np.max(snap.values[resolved] / mix[resolved]))
        if not np.isfinite(c):
            raise NumericalError(f"domination constant diverged at t = {t:g}")
        times.append(float(t))
        consts.append(c)
    return DominationReport(times=np.array(times), constants=np.array(consts))


@dataclass(frozen=True)
class HolderReport:
    """Empirical space/time Hölder constants, mixture-normalized.

    The profiles resolve the sups by snapshot time: ``space_profile[k]``
    is the spatial constant of snapshot ``times[k]`` alone, and
    ``time_profile[k]`` the largest quotient among sampled pairs ending
    at ``times[k]`` (0 where no pair ends).
    """

    beta: float
    space_constant: float
    time_constant: float
    times: np.ndarray = field(default=None)  # type: ignore[assignment]
    space_profile: np.ndarray = field(default=None)  # type: ignore[assignment]
    time_profile: np.ndarray = field(default=None)  # type: ignore[assignment]


def holder_report(
    flow: DensityFlow,
    beta: float,
    *,
    table: KernelTable | None = None,
    lags: tuple = (1, 2, 4, 8, 16, 32, 64),
    time_stride: int = 4,
    density_floor: float = 2e-3,
) -> HolderReport:
    """Sampled-increment Hölder quotients of the flow.

    Spatial quotient: ``|rho_t(y+l) - rho_t(y)| t^(beta/alpha) /
    (l^beta (mix(y+l) + mix(y)))`` over grid shifts ``l``; temporal
    quotient mirrors it with ``|t2-t1|^(beta/alpha)`` and the
    time-weighted mixture sum.  The mixture is the free evolution of the
    t = 0 snapshot, so the report needs nothing beyond the flow itself.
    Quotients are sampled only where every mixture value involved is at
    least ``density_floor``, for the same reason as in
    ``domination_report``: below the estimator's resolution the
    increment is shot noise.
    """
    alpha = flow.alpha
    if not 0.0 < beta < alpha - 1.0:
        raise ParameterError(f"beta must lie in (0, alpha - 1), got {beta}")
    if not density_floor > 0.0:
        raise ParameterError(f"density_floor must be positive, got {density_floor}")
    if table is None:
        table = build_kernel_table(alpha, d=flow.grid.dim)
    grid = flow.grid
    base = flow.densities[0]

    mixes = {}
    for t in flow.times:
        if t > 0.0:
            mixes[float(t)] = mixture_density(base, float(t), table)

    sample_times = [float(t) for t in flow.times if t > 0.0]
    space_profile = []
    for t, snap in zip(flow.times, flow.densities):
        if t <= 0.0:
            continue
        mix = mixes[float(t)]
        here = 0.0
        for lag in lags:
            dist = (lag * grid.spacing) ** beta
            for axis in range(grid.dim):
                shifted = np.roll(snap.values, -lag, axis=axis)
                mix_shift = np.roll(mix, -lag, axis=axis)
                resolved = (mix >= density_floor) & (mix_shift >= density_floor)
                quot = (
                    np.abs(shifted - snap.values)
                    * float(t) ** (beta / alpha)
                    / (dist * (mix + mix_shift))
                )
                here = max(here, float(np.max(quot[resolved])))
        space_profile.append(here)
    space = max(space_profile, default=0.0)

    times = sample_times
    snaps = {float(t): s.values for t, s in zip(flow.times, flow.densities) if t > 0.0}
    time_profile = [0.0] * len(times)
    for i, t1 in enumerate(times):
        for j in (i + 1, i + time_stride):
            if j >= len(times):
                continue
            t2 = times[j]
            resolved = (mixes[t1] >= density_floor) & (mixes[t2] >= density_floor)
            weighted = (
                mixes[t1] * t1 ** (-beta / alpha) + mixes[t2] * t2 ** (-beta / alpha)
            )
            quot = np.abs(snaps[t2] - snaps[t1]) / ((t2 - t1) ** (beta / alpha) * weighted)
            time_profile[j] = max(time_profile[j], float(np.max(quot[resolved])))
    temporal = max(time_profile, default=0.0)
    return HolderReport(
        beta=beta,
        space_constant=space,
        time_constant=temporal,
        times=np.array(times),
        space_profile=np.array(space_profile),
        time_profile=np.array(time_profile),
    )


@dataclass(frozen=True)
class ConvergenceRow:
    n_steps: int
    n_particles: int
    checkpoint_times: np.ndarray
    errors: np.ndarray  # e(t) at the checkpoints
    final_error: float  # e(T)
    integrated_error: float  # trapezoid of e(t), t >= h


@dataclass(frozen=True)
class ConvergenceTable:
    rows: list

    def as_columns(self) -> dict:
        return {
            "n_steps": [r.n_steps for r in self.rows],
            "n_particles": [r.n_particles for r in self.rows],
            "final_error": [r.final_error for r in self.rows],
            "integrated_error": [r.integrated_error for r in self.rows],
        }


def _common_checkpoints(scheme_times: np.ndarray, ref_times: np.ndarray) -> np.ndarray:
    common = [
        t for t in scheme_times if np.any(np.abs(ref_times - t) < 1e-9) and t > 0.0
    ]
    if len(common) < 2:
        raise ParameterError(
            "scheme and reference share fewer than 2 positive checkpoint times; "
            "choose reference steps as a multiple of every n_steps"
        )
    return np.array(common)


def flow_error_against(
    flow: DensityFlow, reference: DensityFlow, *, skip_below: float = 0.0
) -> tuple[np.ndarray, np.ndarray]:
    """L1 distances at shared times; returns (times, errors)."""
    if flow.grid != reference.grid:
        raise ParameterError("flows live on different grids")
    checkpoints = _common_checkpoints(flow.times, reference.times)
    checkpoints = checkpoints[checkpoints >= skip_below - 1e-12]
    errs = [
        flow.at(float(t)).l1_distance(reference.at(float(t))) for t in checkpoints
    ]
    return checkpoints, np.array(errs)


def convergence_study(
    configs: list, reference: DensityFlow, grid: TorusGrid
) -> ConvergenceTable:
    """Run every config and tabulate L1 errors against the reference.

    Configs must share (alpha, drift, initial, horizon); the integrated
    error excludes t < h, where the scheme has no drift by construction
    and the comparison would only measure the initial KDE.
    """
    first = configs[0]
    for cfg in configs[1:]:
        if (
            cfg.alpha != first.alpha
            or cfg.drift != first.drift
            or cfg.initial != first.initial
            or cfg.horizon != first.horizon
            or cfg.dim != first.dim
        ):
            raise ParameterError(
                "configs must agree on (alpha, drift, initial, horizon, dim)"
            )
    rows = []
    for cfg in configs:
        flow, _ = run_euler(cfg, grid)
        times, errs = flow_error_against(flow, reference, skip_below=cfg.step)
        integrated = float(np.trapezoid(errs, times)) if len(times) > 1 else 0.0
        rows.append(
            ConvergenceRow(
                n_steps=cfg.n_steps,
                n_particles=cfg.n_particles,
                checkpoint_times=times,
                errors=errs,
                final_error=float(errs[-1]),
                integrated_error=integrated,
            )
        )
    return ConvergenceTable(rows=rows)


@dataclass(frozen=True)
class UniquenessReport:
    times: np.ndarray
    mutual: np.ndarray
    budget: np.ndarray  # e_A + e_B + noise per checkpoint
    noise_band: float


def uniqueness_consistency(
    seed_a: int,
    seed_b: int,
    config: EulerConfig,
    reference: DensityFlow,
    grid: TorusGrid,
) -> UniquenessReport:
    """Two independent runs must agree within their distances to the reference.

    The mutual L1 distance at each checkpoint is compared against
    ``e_A + e_B`` plus an MC noise allowance ``2 / sqrt(n)`` per run; a
    violation raises, since it contradicts the triangle inequality up to
    noise and would mean the two runs see different limits.
    """
    import dataclasses

    cfg_a = dataclasses.replace(config, seed=seed_a)
    cfg_b = dataclasses.replace(config, seed=seed_b)
    flow_a, _ = run_euler(cfg_a, grid)
    flow_b, _ = run_euler(cfg_b, grid)
    times, e_a = flow_error_against(flow_a, reference, skip_below=config.step)
    _, e_b = flow_error_against(flow_b, reference, skip_below=config.step)
    mutual = np.array(
        [flow_a.at(float(t)).l1_distance(flow_b.at(float(t))) for t in times]
    )
    noise = 2.0 / np.sqrt(config.n_particles)
    budget = e_a + e_b + noise
    bad = mutual > budget
    if np.any(bad):
        worst = int(np.argmax(mutual - budget))
        raise NumericalError(
            f"mutual distance {mutual[worst]:g} at t = {times[worst]:g} exceeds "
            f"the triangle budget {budget[worst]:g}"
        )
    return UniquenessReport(times=times, mutual=mutual, budget=budget, noise_band=noise)
