"""Command-line entry point.

Exit codes: 0 all assertions passed, 1 an assertion failed, 2 bad
configuration or arguments, 3 a computation left its certified regime.
STABLE_DDSDE_THREADS caps the numeric worker count; it must be read
before the array stack is imported, which is why all heavy imports live
inside main().
"""

from __future__ import annotations

import argparse
import os
import sys

_THREAD_VARS = (
    "OMP_NUM_THREADS",
    "OPENBLAS_NUM_THREADS",
    "MKL_NUM_THREADS",
    "NUMEXPR_NUM_THREADS",
)


def _apply_thread_cap() -> None:
    raw = os.environ.get("STABLE_DDSDE_THREADS")
    if raw is None:
        return
    try:
        threads = max(1, int(raw))
    except ValueError:
        print(f"stable-ddsde: ignoring STABLE_DDSDE_THREADS={raw!r} (not an integer)",
              file=sys.stderr)
        return
    for var in _THREAD_VARS:
        os.environ.setdefault(var, str(threads))


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stable-ddsde",
        description="Numerical laboratory for density-dependent SDEs "
                    "driven by alpha-stable noise.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, config_required: bool = True) -> None:
        p.add_argument("--config", required=config_required, metavar="FILE",
                       help="TOML experiment file")
        p.add_argument("--out", metavar="DIR", help="output directory")
        p.add_argument("--seed", type=int, metavar="S", help="root seed override")

    common(sub.add_parser("kernel-table", help="tabulate the heat kernel profile"))

    verify = sub.add_parser("verify", help="check the analytic inequalities")
    verify_sub = verify.add_subparsers(dest="target", required=True)
    common(verify_sub.add_parser("kernel", help="kernel bounds and golden values"))
    common(verify_sub.add_parser("besov", help="block decay, Schauder, norm equivalence"))

    simulate = sub.add_parser("simulate", help="run a density or particle evolution")
    simulate_sub = simulate.add_subparsers(dest="target", required=True)
    common(simulate_sub.add_parser("pde", help="splitting solver for the density flow"))
    common(simulate_sub.add_parser("particles", help="interacting particle scheme"))

    common(sub.add_parser("convergence", help="error table across a config family"))
    common(sub.add_parser("uniqueness", help="independent-seed consistency check"))

    report = sub.add_parser("report", help="aggregate run records into CSV and SVG")
    report.add_argument("runs", nargs="*", metavar="RUN_DIR",
                        help="run directories (defaults to [report].runs)")
    common(report, config_required=False)
    return parser


def _experiment_kind(args: argparse.Namespace) -> str:
    if args.command in ("verify", "simulate"):
        return f"{args.command}-{args.target}"
    return args.command


def main(argv: list[str] | None = None) -> int:
    _apply_thread_cap()
    args = _build_parser().parse_args(argv)

    from stable_ddsde.errors import ConfigError, NumericalError, ParameterError
    from stable_ddsde.harness.config import load_config, validate_config
    from stable_ddsde.harness.runner import run_experiment

    kind = _experiment_kind(args)
    try:
        if args.config is not None:
            cfg = load_config(args.config, kind=kind, seed=args.seed, out=args.out)
        else:
            data = {}
            if kind == "report" and args.runs:
                data = {"report": {"runs": list(args.runs)}}
            cfg = validate_config(data, kind=kind, seed=args.seed, out=args.out)
        if kind == "report" and args.runs and args.config is not None:
            from dataclasses import replace

            from stable_ddsde.harness.config import ReportBlock

            cfg = replace(cfg, report=ReportBlock(runs=tuple(args.runs)))
        record = run_experiment(cfg, out_dir=args.out)
    except (ConfigError, ParameterError) as exc:
        print(f"stable-ddsde: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"stable-ddsde: {exc}", file=sys.stderr)
        return 3
    return 0 if record.passed else 1


if __name__ == "__main__":
    sys.exit(main())
