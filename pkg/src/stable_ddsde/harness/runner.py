"""Experiment orchestration: dispatch, artifacts, run records.

Every experiment writes its artifacts plus a ``run-manifest.json`` into
the output directory.  The manifest carries the full config snapshot, a
content hash of (config, seed), per-assertion outcomes and summary
metrics; identical (config, seed) pairs reproduce identical artifact
hashes on one platform.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import sys
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from stable_ddsde.errors import ConfigError
from stable_ddsde.besov_lp import (
    DyadicPartition,
    TorusGrid,
    besov_norm,
    holder_norm,
    lp_decay_profile,
    random_band_limited,
    schauder_constant,
)
from stable_ddsde.euler_scheme import (
    EulerConfig,
    convergence_study,
    domination_report,
    holder_report,
    mixture_density,
    run_euler,
    uniqueness_consistency,
)
from stable_ddsde.fokker_planck import gronwall_contraction, nfp_solve, save_flow
from stable_ddsde.harness.config import ExperimentConfig
from stable_ddsde.rng import RngStream
from stable_ddsde.stable_process import (
    build_kernel_table,
    ck_defect,
    heat_equation_residual,
    kernel_bound_report,
    p_alpha,
    save_kernel_table,
)

DIAGNOSTIC_COLUMNS = (
    "time", "l1_error", "domination_C", "holder_C_space", "holder_C_time",
)


@dataclass
class RunRecord:
    kind: str
    seed: int
    config: dict
    config_hash: str
    started: str
    finished: str
    status: str
    artifacts: list = field(default_factory=list)
    assertions: list = field(default_factory=list)
    metrics: dict = field(default_factory=dict)
    error: str | None = None

    @property
    def passed(self) -> bool:
        return self.status == "passed"

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "seed": self.seed,
            "config": self.config,
            "config_hash": self.config_hash,
            "started": self.started,
            "finished": self.finished,
            "status": self.status,
            "artifacts": self.artifacts,
            "assertions": self.assertions,
            "metrics": self.metrics,
            "error": self.error,
        }


def _progress(msg: str) -> None:
    print(f"stable-ddsde: {msg}", file=sys.stderr, flush=True)


def _utc_now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def config_hash(cfg: ExperimentConfig) -> str:
    payload = {"kind": cfg.kind, "seed": cfg.seed, "config": cfg.raw}
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def _hash_file(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


class _Artifacts:
    """Tracks written files and their content hashes."""

    def __init__(self, out: Path) -> None:
        self.out = out
        self.entries: list[dict] = []

    def add(self, path: Path) -> None:
        rel = path.relative_to(self.out)
        self.entries.append({"file": str(rel), "sha256": _hash_file(path)})

    def add_tree(self, directory: Path) -> None:
        for f in sorted(directory.rglob("*")):
            if f.is_file():
                self.add(f)

    def write_json(self, name: str, payload: dict) -> Path:
        path = self.out / name
        path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n",
                        encoding="utf-8")
        self.add(path)
        return path

    def write_csv(self, name: str, header, rows) -> Path:
        path = self.out / name
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            for row in rows:
                writer.writerow([_fmt(v) for v in row])
        self.add(path)
        return path


def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


class _Assertions:
    def __init__(self) -> None:
        self.entries: list[dict] = []

    def record(self, name: str, passed: bool, detail: str) -> None:
        self.entries.append({"name": name, "passed": bool(passed), "detail": detail})
        marker = "pass" if passed else "FAIL"
        _progress(f"  [{marker}] {name}: {detail}")

    @property
    def all_passed(self) -> bool:
        return all(e["passed"] for e in self.entries)


def _build_grid(cfg: ExperimentConfig) -> TorusGrid:
    return TorusGrid(extent=cfg.grid.extent, points=cfg.grid.points, dim=cfg.grid.dim)


def _kernel_table(cfg: ExperimentConfig, d: int | None = None):
    block = cfg.process
    return build_kernel_table(
        block.alpha,
        d=block.d if d is None else d,
        n_radii=block.n_radii,
        extended=block.extended,
    )


def _golden_assertion(cfg: ExperimentConfig, table, checks: _Assertions) -> float:
    alpha, d = cfg.process.alpha, cfg.process.d
    origin = float(p_alpha(1.0, np.zeros(d), table))
    if d != 1:
        checks.record("kernel_origin_finite", math.isfinite(origin) and origin > 0,
                      f"p(1,0) = {origin:.8g}")
        return origin
    golden = 1.0 / (2.0 * math.sqrt(math.pi)) if alpha == 2.0 else math.gamma(1.0 + 1.0 / alpha) / math.pi
    err = abs(origin - golden)
    checks.record("kernel_origin_value", err <= 1e-6,
                  f"|p(1,0) - {golden:.10g}| = {err:.3g} (tol 1e-06)")
    return origin


def _run_kernel_table(cfg: ExperimentConfig, out: Path, art: _Artifacts,
                      checks: _Assertions) -> dict:
    _progress(f"building kernel table (alpha={cfg.process.alpha}, d={cfg.process.d}, "
              f"n_radii={cfg.process.n_radii})")
    table = _kernel_table(cfg)
    path = out / "kernel_table.skt"
    save_kernel_table(table, path)
    art.add(path)
    origin = _golden_assertion(cfg, table, checks)
    return {"alpha": cfg.process.alpha, "d": cfg.process.d,
            "n_radii": cfg.process.n_radii, "p_origin": origin}


def _tail_slope(table) -> float:
    rs = np.geomspace(30.0, 300.0, 25)
    xs = np.zeros((rs.size, table.params.d))
    xs[:, 0] = rs
    vals = p_alpha(1.0, xs, table)
    return float(np.polyfit(np.log(rs), np.log(vals), 1)[0])


def _run_verify_kernel(cfg: ExperimentConfig, out: Path, art: _Artifacts,
                       checks: _Assertions) -> dict:
    alpha, d = cfg.process.alpha, cfg.process.d
    _progress(f"verifying kernel inequalities at alpha={alpha}, d={d}")
    table = _kernel_table(cfg)
    origin = _golden_assertion(cfg, table, checks)

    slope = _tail_slope(table)
    target = -(d + alpha)
    checks.record("tail_slope", abs(slope - target) <= 0.02 * abs(target),
                  f"fitted {slope:.4f}, expected {target:.4f} within 2%")

    ck = ck_defect(table, 1.0, 1.0)
    checks.record("convolution_defect", ck <= 1e-3, f"L1 defect {ck:.3g} (tol 1e-03)")

    heat = heat_equation_residual(table, t=1.0, extent=cfg.grid.extent,
                                  points=cfg.grid.points)
    checks.record("heat_residual", heat <= 1e-3,
                  f"relative residual {heat:.3g} (tol 1e-03)")

    _progress("scanning two-sided and regularity constants")
    report = kernel_bound_report(table, beta=cfg.verify.beta, seed=cfg.seed)
    checks.record("two_sided_positive",
                  report.ratio_min > 0.0 and math.isfinite(report.ratio_max),
                  f"p/rho in [{report.ratio_min:.4g}, {report.ratio_max:.4g}]")
    checks.record("doubling_bound", report.doubling_max <= report.doubling_bound,
                  f"{report.doubling_max:.4g} <= {report.doubling_bound:.4g}")
    metrics = {
        "p_origin": origin,
        "tail_slope": slope,
        "ck_defect": ck,
        "heat_residual": heat,
        "ratio_min": report.ratio_min,
        "ratio_max": report.ratio_max,
        "gradient_ratio_max": report.gradient_ratio_max,
        "doubling_max": report.doubling_max,
        "space_holder_max": report.space_holder_max,
        "time_holder_max": report.time_holder_max,
    }
    if report.generator_ratio_max is not None:
        metrics["generator_ratio_max"] = report.generator_ratio_max
    art.write_json("kernel_constants.json", metrics)
    return metrics


def _run_verify_besov(cfg: ExperimentConfig, out: Path, art: _Artifacts,
                      checks: _Assertions) -> dict:
    alpha = cfg.process.alpha
    grid = _build_grid(cfg)
    j_max = int(math.floor(math.log2(grid.nyquist))) - 1
    part = DyadicPartition(grid, j_max)
    vb = cfg.verify
    js = list(range(vb.block_lo, vb.block_hi + 1))
    _progress(f"block decay over j={js} (grid nyquist {grid.nyquist:.1f})")
    vals, slope = lp_decay_profile(js, vb.horizon, alpha, part)
    checks.record("block_decay_slope", abs(slope + alpha) <= 0.15,
                  f"fitted {slope:.3f}, expected {-alpha:.3f} within 0.15")

    _progress(f"Schauder constant over {vb.samples} random sources")
    rng = RngStream(cfg.seed, 2)
    schauder = schauder_constant(vb.samples, alpha, vb.beta, vb.horizon, part, rng)
    checks.record("schauder_finite", math.isfinite(schauder.constant),
                  f"constant {schauder.constant:.4g} at beta={vb.beta}")

    ratios = {}
    for beta in (0.4, 0.6, 0.8):
        vals_b = []
        for _ in range(vb.samples):
            f = random_band_limited(part, rng)
            vals_b.append(holder_norm(f, beta) / besov_norm(f, beta, np.inf, np.inf, part).total)
        ratios[beta] = (min(vals_b), max(vals_b))
    worst = max(max(hi, 1.0 / lo) for lo, hi in ratios.values())
    checks.record("holder_besov_equivalence", worst <= 10.0,
                  f"norm ratios within [1/{worst:.3g}, {worst:.3g}] (cap 10)")

    metrics = {
        "lp_slope": slope,
        "lp_integrals": {str(j): float(v) for j, v in zip(js, vals)},
        "schauder_constant": schauder.constant,
        "equivalence_worst": worst,
        "equivalence_ratios": {str(b): [float(lo), float(hi)] for b, (lo, hi) in ratios.items()},
    }
    art.write_json("besov_report.json", metrics)
    return metrics


def _diagnostics_rows(flow, table, initial, beta):
    """Per-time diagnostic columns shared by the simulate kinds."""
    dom = domination_report(flow, initial, table)
    hold = holder_report(flow, beta, table=table)
    base = initial.on_grid(flow.grid)
    rows = []
    for k, t in enumerate(dom.times):
        mix = mixture_density(base, float(t), table)
        snap = flow.densities[np.searchsorted(flow.times, t)]
        l1 = float(np.sum(np.abs(snap.values - mix)) * flow.grid.cell_volume)
        rows.append((float(t), l1, float(dom.constants[k]),
                     float(hold.space_profile[k]), float(hold.time_profile[k])))
    return rows, dom, hold


def _run_simulate_pde(cfg: ExperimentConfig, out: Path, art: _Artifacts,
                      checks: _Assertions) -> dict:
    grid = _build_grid(cfg)
    pb = cfg.pde
    _progress(f"solving the density flow ({pb.steps} steps to T={pb.horizon})")
    flow = nfp_solve(cfg.initial, cfg.drift, cfg.process.alpha, pb.horizon,
                     pb.steps, grid, window_mass_budget=pb.window_mass_budget)
    save_flow(flow, out / "flow")
    art.add_tree(out / "flow")

    table = _kernel_table(cfg, d=grid.dim)
    rows, dom, hold = _diagnostics_rows(flow, table, cfg.initial,
                                        cfg.particles.holder_beta)
    art.write_csv("diagnostics.csv", DIAGNOSTIC_COLUMNS, rows)

    checks.record("mass_certified", True,
                  f"clipped negative mass total {float(np.sum(flow.clipped_mass)):.3g}")
    checks.record("domination_finite", math.isfinite(dom.sup),
                  f"sup C(t) = {dom.sup:.4g}")
    metrics = {
        "final_l1_vs_mixture": rows[-1][1],
        "domination_sup": dom.sup,
        "holder_space": hold.space_constant,
        "holder_time": hold.time_constant,
        "n_steps": pb.steps,
    }
    if pb.gronwall_horizon > 0.0:
        _progress(f"Gronwall contraction over T={pb.gronwall_horizon}")
        kappa = gronwall_contraction(cfg.initial, cfg.drift, cfg.process.alpha,
                                     pb.gronwall_horizon, pb.steps, grid)
        checks.record("gronwall_contraction", kappa < 1.0, f"kappa = {kappa:.4g}")
        metrics["gronwall_kappa"] = kappa
    return metrics


def _euler_config(cfg: ExperimentConfig, *, seed: int | None = None,
                  n_steps: int | None = None, n_particles: int | None = None) -> EulerConfig:
    pb = cfg.particles
    return EulerConfig(
        horizon=pb.horizon,
        n_steps=pb.n_steps if n_steps is None else n_steps,
        n_particles=pb.n_particles if n_particles is None else n_particles,
        bandwidth=pb.bandwidth,
        seed=cfg.seed if seed is None else seed,
        drift=cfg.drift,
        alpha=cfg.process.alpha,
        dim=cfg.grid.dim,
        initial=cfg.initial,
    )


def _reference_flow(cfg: ExperimentConfig, grid: TorusGrid, steps: int):
    _progress(f"reference density flow at {steps} steps")
    return nfp_solve(cfg.initial, cfg.drift, cfg.process.alpha,
                     cfg.particles.horizon, steps, grid)


def _run_simulate_particles(cfg: ExperimentConfig, out: Path, art: _Artifacts,
                            checks: _Assertions) -> dict:
    grid = _build_grid(cfg)
    euler_cfg = _euler_config(cfg)
    _progress(f"running {euler_cfg.n_particles} particles over "
              f"{euler_cfg.n_steps} steps (seed {euler_cfg.seed})")
    flow, ensemble = run_euler(euler_cfg, grid)
    save_flow(flow, out / "flow")
    art.add_tree(out / "flow")

    table = _kernel_table(cfg, d=grid.dim)
    rows, dom, hold = _diagnostics_rows(flow, table, cfg.initial,
                                        cfg.particles.holder_beta)
    metrics = {
        "n_steps": euler_cfg.n_steps,
        "n_particles": euler_cfg.n_particles,
        "domination_sup": dom.sup,
        "holder_space": hold.space_constant,
        "holder_time": hold.time_constant,
    }

    if cfg.particles.reference_steps:
        ref = _reference_flow(cfg, grid, cfg.particles.reference_steps)
        stride = cfg.particles.reference_steps // euler_cfg.n_steps
        rows = [
            (t, float(np.sum(np.abs(
                flow.densities[k + 1].values - ref.densities[(k + 1) * stride].values
            )) * grid.cell_volume), dom_c, hs, ht)
            for k, (t, _, dom_c, hs, ht) in enumerate(rows)
        ]
        metrics["e_final"] = rows[-1][1]
        checks.record("reference_distance_finite", math.isfinite(rows[-1][1]),
                      f"e(T) = {rows[-1][1]:.4g} against {cfg.particles.reference_steps}-step solve")
    art.write_csv("diagnostics.csv", DIAGNOSTIC_COLUMNS, rows)

    escaped = 1.0 - float(np.mean(np.all(np.abs(ensemble.positions) < 0.5 * grid.extent, axis=1)))
    checks.record("particles_in_window", escaped <= 1e-2,
                  f"escaped fraction {escaped:.3g} (budget 0.01)")
    checks.record("domination_finite", math.isfinite(dom.sup),
                  f"sup C(t) = {dom.sup:.4g}")
    return metrics


def _run_convergence(cfg: ExperimentConfig, out: Path, art: _Artifacts,
                     checks: _Assertions) -> dict:
    grid = _build_grid(cfg)
    members = cfg.convergence.members
    configs = [_euler_config(cfg, n_steps=ns, n_particles=np_) for ns, np_ in members]
    reference = _reference_flow(cfg, grid, cfg.convergence.reference_steps)
    _progress(f"convergence family of {len(configs)} runs")
    table = convergence_study(configs, reference, grid)
    cols = table.as_columns()
    art.write_csv(
        "convergence.csv",
        ("n_steps", "n_particles", "e_final", "e_integrated"),
        zip(cols["n_steps"], cols["n_particles"], cols["final_error"],
            cols["integrated_error"]),
    )

    errors = [float(e) for e in cols["final_error"]]
    band = 2.0 / math.sqrt(min(np_ for _, np_ in members))
    monotone = all(b <= a + band for a, b in zip(errors, errors[1:]))
    checks.record("errors_non_increasing", monotone,
                  f"e(T) = {[round(e, 5) for e in errors]} within noise band {band:.3g}")
    checks.record("integrated_finite",
                  all(math.isfinite(e) for e in cols["integrated_error"]),
                  f"E = {[round(float(e), 5) for e in cols['integrated_error']]}")
    return {
        "e_final": errors,
        "e_integrated": [float(e) for e in cols["integrated_error"]],
        "n_steps": [int(n) for n in cols["n_steps"]],
        "n_particles": [int(n) for n in cols["n_particles"]],
    }


def _run_uniqueness(cfg: ExperimentConfig, out: Path, art: _Artifacts,
                    checks: _Assertions) -> dict:
    grid = _build_grid(cfg)
    steps = cfg.particles.reference_steps or 2 * cfg.particles.n_steps
    reference = _reference_flow(cfg, grid, steps)
    base = _euler_config(cfg)
    ub = cfg.uniqueness
    _progress(f"independent runs with seeds {ub.seed_a} and {ub.seed_b}")
    report = uniqueness_consistency(ub.seed_a, ub.seed_b, base, reference, grid)
    art.write_csv(
        "uniqueness.csv",
        ("time", "mutual_l1", "budget"),
        zip(report.times, report.mutual, report.budget),
    )
    worst = float(np.max(report.mutual - report.budget))
    checks.record("mutual_within_budget", worst <= 0.0,
                  f"max(mutual - budget) = {worst:.4g}")
    return {
        "max_mutual": float(np.max(report.mutual)),
        "min_budget": float(np.min(report.budget)),
        "noise_band": float(report.noise_band),
    }


def _run_report(cfg: ExperimentConfig, out: Path, art: _Artifacts,
                checks: _Assertions) -> dict:
    from stable_ddsde.harness.report import render_report

    written, skipped = render_report([Path(r) for r in cfg.report.runs], out)
    for path in written:
        art.add(path)
    checks.record("records_loaded", True,
                  f"{len(cfg.report.runs) - len(skipped)} records, {len(skipped)} skipped")
    return {"written": [p.name for p in written], "skipped": skipped}


_DISPATCH = {
    "kernel-table": _run_kernel_table,
    "verify-kernel": _run_verify_kernel,
    "verify-besov": _run_verify_besov,
    "simulate-pde": _run_simulate_pde,
    "simulate-particles": _run_simulate_particles,
    "convergence": _run_convergence,
    "uniqueness": _run_uniqueness,
    "report": _run_report,
}


def run_experiment(cfg: ExperimentConfig, out_dir=None) -> RunRecord:
    """Dispatch a validated config, write artifacts and the run record."""
    out = Path(out_dir or cfg.out or f"runs/{cfg.kind}")
    out.mkdir(parents=True, exist_ok=True)
    record = RunRecord(
        kind=cfg.kind,
        seed=cfg.seed,
        config=cfg.raw,
        config_hash=config_hash(cfg),
        started=_utc_now(),
        finished="",
        status="running",
    )
    art = _Artifacts(out)
    checks = _Assertions()
    _progress(f"{cfg.kind} -> {out}")
    started = time.perf_counter()
    try:
        metrics = _DISPATCH[cfg.kind](cfg, out, art, checks)
    except Exception as exc:
        record.finished = _utc_now()
        record.status = "error"
        record.error = f"{type(exc).__name__}: {exc}"
        record.artifacts = art.entries
        record.assertions = checks.entries
        _write_record(record, out)
        raise
    record.finished = _utc_now()
    record.artifacts = art.entries
    record.assertions = checks.entries
    record.metrics = metrics
    record.status = "passed" if checks.all_passed else "failed"
    record.metrics["wall_seconds"] = round(time.perf_counter() - started, 3)
    _write_record(record, out)
    _progress(f"{cfg.kind}: {record.status} ({record.metrics['wall_seconds']}s)")
    return record


def _write_record(record: RunRecord, out: Path) -> None:
    path = out / "run-manifest.json"
    path.write_text(json.dumps(record.to_dict(), indent=2, sort_keys=True) + "\n",
                    encoding="utf-8")


def load_record(run_dir) -> RunRecord:
    path = Path(run_dir) / "run-manifest.json"
    if not path.is_file():
        raise ConfigError([(str(path), "no run manifest")])
    data = json.loads(path.read_text(encoding="utf-8"))
    return RunRecord(**data)
