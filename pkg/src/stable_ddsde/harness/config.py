"""Experiment configuration: TOML schema, fail-fast validation.

One file describes one experiment.  Validation collects every violation
with its key path before raising, so a bad config is fixed in one round
trip rather than key by key.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover - exercised only on old interpreters
    import tomli as tomllib

from stable_ddsde.errors import ConfigError, ParameterError
from stable_ddsde.fokker_planck.drift import DriftSpec
from stable_ddsde.fokker_planck.initial import InitialDensity

KINDS = (
    "kernel-table",
    "verify-kernel",
    "verify-besov",
    "simulate-pde",
    "simulate-particles",
    "convergence",
    "uniqueness",
    "report",
)

_GRID_KEYS = {"extent", "points", "dim"}
_PROCESS_KEYS = {"alpha", "d", "n_radii", "extended"}
_DRIFT_KEYS = {
    "kind", "amplitude", "spatial", "envelope", "wave_number",
    "holder_exponent", "components",
}
_INITIAL_KEYS = {
    "kind", "weights", "centers", "sigmas", "center", "width", "holder_exponent",
}
_PDE_KEYS = {"horizon", "steps", "window_mass_budget", "gronwall_horizon"}
_PARTICLES_KEYS = {
    "horizon", "n_steps", "n_particles", "bandwidth", "reference_steps",
    "holder_beta",
}
_CONVERGENCE_KEYS = {"reference_steps", "member"}
_MEMBER_KEYS = {"n_steps", "n_particles"}
_UNIQUENESS_KEYS = {"seed_a", "seed_b"}
_VERIFY_KEYS = {"beta", "samples", "block_lo", "block_hi", "horizon"}
_REPORT_KEYS = {"runs"}
_TOP_KEYS = {
    "kind", "seed", "out",
    "grid", "process", "drift", "initial", "pde", "particles",
    "convergence", "uniqueness", "verify", "report",
}


@dataclass(frozen=True)
class GridBlock:
    extent: float = 80.0
    points: int = 4096
    dim: int = 1


@dataclass(frozen=True)
class ProcessBlock:
    alpha: float = 1.5
    d: int = 1
    n_radii: int = 4096
    extended: bool = False


@dataclass(frozen=True)
class PdeBlock:
    horizon: float = 1.0
    steps: int = 64
    window_mass_budget: float = 1e-2
    gronwall_horizon: float = 0.0  # 0 disables the contraction diagnostic


@dataclass(frozen=True)
class ParticlesBlock:
    horizon: float = 1.0
    n_steps: int = 128
    n_particles: int = 0  # required: no honest default exists
    bandwidth: object = "silverman"
    reference_steps: int = 0  # 0 compares against the free mixture
    holder_beta: float = 0.45


@dataclass(frozen=True)
class ConvergenceBlock:
    reference_steps: int = 256
    members: tuple = ()


@dataclass(frozen=True)
class UniquenessBlock:
    seed_a: int = 1
    seed_b: int = 2


@dataclass(frozen=True)
class VerifyBlock:
    beta: float = 0.6
    samples: int = 20
    block_lo: int = 2
    block_hi: int = 7
    horizon: float = 1.0


@dataclass(frozen=True)
class ReportBlock:
    runs: tuple = ()


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str
    seed: int = 0
    out: str | None = None
    grid: GridBlock = field(default_factory=GridBlock)
    process: ProcessBlock = field(default_factory=ProcessBlock)
    drift: DriftSpec = field(default_factory=DriftSpec)
    initial: InitialDensity = field(default_factory=InitialDensity)
    pde: PdeBlock = field(default_factory=PdeBlock)
    particles: ParticlesBlock = field(default_factory=ParticlesBlock)
    convergence: ConvergenceBlock = field(default_factory=ConvergenceBlock)
    uniqueness: UniquenessBlock = field(default_factory=UniquenessBlock)
    verify: VerifyBlock = field(default_factory=VerifyBlock)
    report: ReportBlock = field(default_factory=ReportBlock)
    raw: dict = field(default_factory=dict)


class _Collector:
    """Accumulates (key path, message) pairs during validation."""

    def __init__(self) -> None:
        self.errors: list[tuple[str, str]] = []

    def add(self, path: str, msg: str) -> None:
        self.errors.append((path, msg))

    def check(self, ok: bool, path: str, msg: str) -> bool:
        if not ok:
            self.add(path, msg)
        return ok

    def raise_if_any(self) -> None:
        if self.errors:
            raise ConfigError(self.errors)


def _reject_unknown(block: dict, allowed: set, prefix: str, errs: _Collector) -> None:
    for key in block:
        if key not in allowed:
            errs.add(f"{prefix}{key}", "unknown key")


def _number(block: dict, key: str, default, errs: _Collector, prefix: str,
            *, integer: bool = False):
    if key not in block:
        return default
    val = block[key]
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        errs.add(f"{prefix}{key}", f"expected a number, got {val!r}")
        return default
    if integer:
        if isinstance(val, float) and not val.is_integer():
            errs.add(f"{prefix}{key}", f"expected an integer, got {val!r}")
            return default
        return int(val)
    return float(val)


def _grid_block(data: dict, errs: _Collector) -> GridBlock:
    block = data.get("grid", {})
    _reject_unknown(block, _GRID_KEYS, "grid.", errs)
    extent = _number(block, "extent", 80.0, errs, "grid.")
    points = _number(block, "points", 4096, errs, "grid.", integer=True)
    dim = _number(block, "dim", 1, errs, "grid.", integer=True)
    errs.check(extent > 0.0, "grid.extent", f"must be positive, got {extent}")
    errs.check(dim in (1, 2), "grid.dim", f"must be 1 or 2, got {dim}")
    min_points = 256 if dim == 1 else 128
    errs.check(
        points >= min_points and (points & (points - 1)) == 0,
        "grid.points",
        f"must be a power of two >= {min_points}, got {points}",
    )
    return GridBlock(extent=extent, points=points, dim=dim)


def _process_block(data: dict, errs: _Collector) -> ProcessBlock:
    block = data.get("process", {})
    _reject_unknown(block, _PROCESS_KEYS, "process.", errs)
    alpha = _number(block, "alpha", 1.5, errs, "process.")
    d = _number(block, "d", 1, errs, "process.", integer=True)
    n_radii = _number(block, "n_radii", 4096, errs, "process.", integer=True)
    extended = block.get("extended", False)
    if not isinstance(extended, bool):
        errs.add("process.extended", f"expected a boolean, got {extended!r}")
        extended = False
    if extended:
        errs.check(1.0 < alpha <= 2.0, "process.alpha",
                   f"must lie in (1, 2] under the extended flag, got {alpha}")
    else:
        errs.check(1.0 < alpha < 2.0, "process.alpha",
                   f"alpha must lie in (1, 2), got {alpha}")
    errs.check(d in (1, 2), "process.d", f"must be 1 or 2, got {d}")
    errs.check(n_radii >= 64, "process.n_radii", f"must be >= 64, got {n_radii}")
    return ProcessBlock(alpha=alpha, d=d, n_radii=n_radii, extended=extended)


def _drift_block(data: dict, errs: _Collector, prefix: str = "drift.") -> DriftSpec:
    block = data.get("drift", {})
    return _drift_from(block, errs, prefix)


def _drift_from(block: dict, errs: _Collector, prefix: str) -> DriftSpec:
    _reject_unknown(block, _DRIFT_KEYS, prefix, errs)
    kwargs = {k: block[k] for k in block if k in _DRIFT_KEYS and k != "components"}
    components = []
    for i, sub in enumerate(block.get("components", [])):
        if not isinstance(sub, dict):
            errs.add(f"{prefix}components[{i}]", "expected a table")
            continue
        components.append(_drift_from(sub, errs, f"{prefix}components[{i}]."))
    if components:
        kwargs["components"] = tuple(components)
    try:
        return DriftSpec(**kwargs)
    except (ParameterError, TypeError) as exc:
        errs.add(prefix.rstrip("."), str(exc))
        return DriftSpec()


def _initial_block(data: dict, errs: _Collector) -> InitialDensity:
    block = data.get("initial", {})
    _reject_unknown(block, _INITIAL_KEYS, "initial.", errs)
    kwargs = {}
    for key in block:
        if key not in _INITIAL_KEYS:
            continue
        val = block[key]
        kwargs[key] = tuple(val) if isinstance(val, list) else val
    try:
        return InitialDensity(**kwargs)
    except (ParameterError, TypeError) as exc:
        errs.add("initial", str(exc))
        return InitialDensity()


def _pde_block(data: dict, errs: _Collector) -> PdeBlock:
    block = data.get("pde", {})
    _reject_unknown(block, _PDE_KEYS, "pde.", errs)
    horizon = _number(block, "horizon", 1.0, errs, "pde.")
    steps = _number(block, "steps", 64, errs, "pde.", integer=True)
    budget = _number(block, "window_mass_budget", 1e-2, errs, "pde.")
    gronwall = _number(block, "gronwall_horizon", 0.0, errs, "pde.")
    errs.check(horizon > 0.0, "pde.horizon", f"must be positive, got {horizon}")
    errs.check(steps >= 1, "pde.steps", f"must be >= 1, got {steps}")
    errs.check(0.0 < budget < 1.0, "pde.window_mass_budget",
               f"must lie in (0, 1), got {budget}")
    errs.check(gronwall >= 0.0, "pde.gronwall_horizon",
               f"must be >= 0, got {gronwall}")
    return PdeBlock(horizon=horizon, steps=steps, window_mass_budget=budget,
                    gronwall_horizon=gronwall)


def _particles_block(data: dict, errs: _Collector, required: bool) -> ParticlesBlock:
    block = data.get("particles", {})
    _reject_unknown(block, _PARTICLES_KEYS, "particles.", errs)
    horizon = _number(block, "horizon", 1.0, errs, "particles.")
    n_steps = _number(block, "n_steps", 128, errs, "particles.", integer=True)
    n_particles = _number(block, "n_particles", 0, errs, "particles.", integer=True)
    reference_steps = _number(block, "reference_steps", 0, errs, "particles.",
                              integer=True)
    holder_beta = _number(block, "holder_beta", 0.45, errs, "particles.")
    bandwidth = block.get("bandwidth", "silverman")
    if isinstance(bandwidth, str):
        errs.check(bandwidth == "silverman", "particles.bandwidth",
                   f"must be 'silverman' or a positive number, got {bandwidth!r}")
    elif isinstance(bandwidth, bool) or not isinstance(bandwidth, (int, float)):
        errs.add("particles.bandwidth",
                 f"must be 'silverman' or a positive number, got {bandwidth!r}")
        bandwidth = "silverman"
    else:
        errs.check(bandwidth > 0, "particles.bandwidth",
                   f"must be positive, got {bandwidth}")
        bandwidth = float(bandwidth)
    errs.check(horizon > 0.0, "particles.horizon", f"must be positive, got {horizon}")
    errs.check(n_steps >= 2, "particles.n_steps", f"must be >= 2, got {n_steps}")
    if required and "n_particles" not in block:
        errs.add("particles.n_particles", "required key is missing")
    elif required:
        errs.check(n_particles >= 1000, "particles.n_particles",
                   f"must be >= 1000, got {n_particles}")
    if reference_steps:
        errs.check(
            reference_steps % max(n_steps, 1) == 0,
            "particles.reference_steps",
            f"must be a multiple of n_steps={n_steps}, got {reference_steps}",
        )
    return ParticlesBlock(horizon=horizon, n_steps=n_steps, n_particles=n_particles,
                          bandwidth=bandwidth, reference_steps=reference_steps,
                          holder_beta=holder_beta)


def _convergence_block(data: dict, errs: _Collector, required: bool) -> ConvergenceBlock:
    block = data.get("convergence", {})
    _reject_unknown(block, _CONVERGENCE_KEYS, "convergence.", errs)
    reference_steps = _number(block, "reference_steps", 256, errs, "convergence.",
                              integer=True)
    errs.check(reference_steps >= 2, "convergence.reference_steps",
               f"must be >= 2, got {reference_steps}")
    members = []
    raw_members = block.get("member", [])
    if required and not raw_members:
        errs.add("convergence.member", "at least one [[convergence.member]] is required")
    for i, sub in enumerate(raw_members):
        prefix = f"convergence.member[{i}]."
        if not isinstance(sub, dict):
            errs.add(prefix.rstrip("."), "expected a table")
            continue
        _reject_unknown(sub, _MEMBER_KEYS, prefix, errs)
        n_steps = _number(sub, "n_steps", 0, errs, prefix, integer=True)
        n_particles = _number(sub, "n_particles", 0, errs, prefix, integer=True)
        errs.check(n_steps >= 2, f"{prefix}n_steps", f"must be >= 2, got {n_steps}")
        errs.check(n_particles >= 1000, f"{prefix}n_particles",
                   f"must be >= 1000, got {n_particles}")
        members.append((n_steps, n_particles))
    return ConvergenceBlock(reference_steps=reference_steps, members=tuple(members))


def _uniqueness_block(data: dict, errs: _Collector) -> UniquenessBlock:
    block = data.get("uniqueness", {})
    _reject_unknown(block, _UNIQUENESS_KEYS, "uniqueness.", errs)
    seed_a = _number(block, "seed_a", 1, errs, "uniqueness.", integer=True)
    seed_b = _number(block, "seed_b", 2, errs, "uniqueness.", integer=True)
    errs.check(seed_a != seed_b, "uniqueness.seed_b",
               "seeds must differ for an independence check")
    return UniquenessBlock(seed_a=seed_a, seed_b=seed_b)


def _verify_block(data: dict, errs: _Collector) -> VerifyBlock:
    block = data.get("verify", {})
    _reject_unknown(block, _VERIFY_KEYS, "verify.", errs)
    beta = _number(block, "beta", 0.6, errs, "verify.")
    samples = _number(block, "samples", 20, errs, "verify.", integer=True)
    block_lo = _number(block, "block_lo", 2, errs, "verify.", integer=True)
    block_hi = _number(block, "block_hi", 7, errs, "verify.", integer=True)
    horizon = _number(block, "horizon", 1.0, errs, "verify.")
    errs.check(0.0 < beta < 1.0, "verify.beta", f"must lie in (0, 1), got {beta}")
    errs.check(samples >= 1, "verify.samples", f"must be >= 1, got {samples}")
    errs.check(0 <= block_lo < block_hi, "verify.block_lo",
               f"need 0 <= block_lo < block_hi, got {block_lo}, {block_hi}")
    errs.check(horizon > 0.0, "verify.horizon", f"must be positive, got {horizon}")
    return VerifyBlock(beta=beta, samples=samples, block_lo=block_lo,
                       block_hi=block_hi, horizon=horizon)


def _report_block(data: dict, errs: _Collector, required: bool) -> ReportBlock:
    block = data.get("report", {})
    _reject_unknown(block, _REPORT_KEYS, "report.", errs)
    runs = block.get("runs", [])
    if not isinstance(runs, list) or not all(isinstance(r, str) for r in runs):
        errs.add("report.runs", "expected a list of run directory strings")
        runs = []
    if required and not runs:
        errs.add("report.runs", "at least one run directory is required")
    return ReportBlock(runs=tuple(runs))


def validate_config(data: dict, *, kind: str | None = None,
                    seed: int | None = None, out: str | None = None) -> ExperimentConfig:
    """Validate a parsed config dict; CLI overrides win over file values.

    Raises ConfigError listing every violation with its key path.
    """
    errs = _Collector()
    if not isinstance(data, dict):
        raise ConfigError([("", "top level must be a table")])
    _reject_unknown(data, _TOP_KEYS, "", errs)

    file_kind = data.get("kind")
    if file_kind is not None and not isinstance(file_kind, str):
        errs.add("kind", f"expected a string, got {file_kind!r}")
        file_kind = None
    if kind is not None and file_kind is not None and kind != file_kind:
        errs.add("kind", f"config says {file_kind!r} but the command selects {kind!r}")
    resolved_kind = kind or file_kind
    if resolved_kind is None:
        errs.add("kind", "missing (set it in the file or choose a subcommand)")
    elif resolved_kind not in KINDS:
        errs.add("kind", f"must be one of {', '.join(KINDS)}; got {resolved_kind!r}")

    if seed is None:
        seed = _number(data, "seed", 0, errs, "", integer=True)
    errs.check(isinstance(seed, int) and seed >= 0, "seed",
               f"must be a non-negative integer, got {seed}")

    if out is None:
        out = data.get("out")
        if out is not None and not isinstance(out, str):
            errs.add("out", f"expected a string path, got {out!r}")
            out = None

    grid = _grid_block(data, errs)
    process = _process_block(data, errs)
    drift = _drift_block(data, errs)
    initial = _initial_block(data, errs)
    pde = _pde_block(data, errs)
    needs_particles = resolved_kind in ("simulate-particles", "uniqueness")
    particles = _particles_block(data, errs, required=needs_particles)
    convergence = _convergence_block(data, errs, required=resolved_kind == "convergence")
    uniqueness = _uniqueness_block(data, errs)
    verify = _verify_block(data, errs)
    report = _report_block(data, errs, required=resolved_kind == "report")

    if resolved_kind in ("simulate-particles", "uniqueness", "convergence"):
        if grid.dim == 2 and drift.bound() > 0.0 and drift.kind != "vector":
            errs.add("drift.kind", "two-dimensional runs need a vector drift")

    errs.raise_if_any()
    return ExperimentConfig(
        kind=resolved_kind, seed=seed, out=out, grid=grid, process=process,
        drift=drift, initial=initial, pde=pde, particles=particles,
        convergence=convergence, uniqueness=uniqueness, verify=verify,
        report=report, raw=data,
    )


def load_config(path, *, kind: str | None = None, seed: int | None = None,
                out: str | None = None) -> ExperimentConfig:
    """Parse and validate a TOML experiment file."""
    p = Path(path)
    if not p.is_file():
        raise ConfigError([(str(p), "config file not found")])
    try:
        data = tomllib.loads(p.read_text(encoding="utf-8"))
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError([(str(p), f"TOML parse error: {exc}")]) from exc
    return validate_config(data, kind=kind, seed=seed, out=out)
