"""Command-line entry point.

Exit codes: 0 success, 2 configuration error, 3 infeasible discrepancy
principle, 4 numerical failure.
"""
from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path
from typing import Optional, Sequence

from .errors import (
    ConfigError,
    DegenerateDataError,
    DiscrepancyInfeasibleError,
    DomainError,
    GridError,
    NumericalFailure,
    QuadratureLayoutError,
)
from .harness.config import RULE_NAMES, RunConfig, load_config, parse_seeds
from .harness.metrics import ErrorReport, fit_rate, summarize
from .harness.runner import run_sweep, write_outputs
from .io import read_rows
from .noise import PHI_MODES

EXIT_OK, EXIT_CONFIG, EXIT_INFEASIBLE, EXIT_NUMERICAL = 0, 2, 3, 4


def _seed_list(text: str) -> tuple[int, ...]:
    try:
        return parse_seeds(text)
    except ConfigError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _run_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="INI run configuration")
    p.add_argument("--eps", type=float, nargs="+", help="noise levels")
    p.add_argument("--seed", type=_seed_list, action="extend", help="seeds, e.g. 1-10 or 1,3,5")
    p.add_argument("--grid", type=int, nargs=2, metavar=("K", "L"), help="spatial and temporal grid sizes")
    p.add_argument("--truncation", type=int, metavar="N", help="number of sine modes (clamped to K-1)")
    p.add_argument("--rule", choices=RULE_NAMES, action="append", help="regularisation rule (repeatable)")
    p.add_argument("--tau", type=float, help="discrepancy factor, > 1")
    p.add_argument("--M", type=float, help="smoothness bound for the a priori rule")
    p.add_argument("--k", type=float, help="smoothness index for the a priori rule")
    p.add_argument("--mu", type=float, help="parameter for the fixed rule")
    p.add_argument("--variant", help="problem variant")
    p.add_argument("--phi-mode", choices=PHI_MODES, help="sign convention of the phi noise")
    p.add_argument("--gnorm-sqrt-pi", action="store_true", default=None, help="scale the g noise by 1/(sqrt(pi) ||g||)")
    p.add_argument("--out", help="output directory")
    p.add_argument("--reference-table", action="store_true", help="reference noise levels, seeds 1-10, all table rules")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="inverse-source",
        description="Regularised recovery of a spatial heat source from final-time data.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in (
        ("example1", "constant diffusion benchmark"),
        ("example2", "affine diffusion benchmark"),
        ("sweep", "run the problem named in --config"),
    ):
        _run_options(sub.add_parser(name, help=text))
    custom = sub.add_parser("custom", help="tabulated or closed-form user problem")
    _run_options(custom)
    custom.add_argument("--a", dest="a_spec", help="'constant C', 'affine ALPHA BETA' or 'csv PATH'")
    custom.add_argument("--phi", dest="phi_spec", help="'constant C', 'polynomial C0 C1 ...', 'exp-minus-one' or 'csv PATH'")
    custom.add_argument("--g", dest="g_path", help="final data CSV (x,value)")
    custom.add_argument("--f", dest="f_path", help="optional exact source CSV (x,value)")
    rate = sub.add_parser("rate", help="log-log slope of median E1 against eps")
    rate.add_argument("csv", nargs="+", type=Path, help="per-seed error CSVs (epsilon,mu,E1,E2,seed)")
    rate.add_argument("--eps-min", type=float, default=0.0)
    rate.add_argument("--eps-max", type=float, default=float("inf"))
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Defaults, then the config file, then command-line flags."""
    cfg = load_config(args.config) if args.config else RunConfig()
    if args.command in ("example1", "example2"):
        cfg = replace(cfg, problem=args.command)
    elif args.command == "custom":
        cfg = replace(cfg, problem="custom")
        cwd = {"base_dir": "."} if any((args.a_spec, args.phi_spec, args.g_path, args.f_path)) else {}
        for field_name, value in (("a", args.a_spec), ("phi", args.phi_spec), ("g", args.g_path), ("f", args.f_path)):
            if value is not None:
                cfg = replace(cfg, **{field_name: value}, **cwd)
    elif args.config is None:
        raise ConfigError("sweep needs --config")
    updates = {}
    if args.eps is not None:
        updates["epsilons"] = tuple(args.eps)
    if args.seed is not None:
        updates["seeds"] = tuple(args.seed)
    if args.grid is not None:
        updates["K"], updates["L"] = args.grid
    for flag, name in (("truncation", "N"), ("tau", "tau"), ("M", "M"), ("k", "k"), ("mu", "mu"),
                       ("variant", "variant"), ("phi_mode", "phi_mode"), ("gnorm_sqrt_pi", "gnorm_sqrt_pi"),
                       ("out", "out_dir")):
        value = getattr(args, flag)
        if value is not None:
            updates[name] = value
    if args.rule is not None:
        updates["rules"] = tuple(dict.fromkeys(args.rule))
    cfg = replace(cfg, **updates)
    if args.reference_table:
        cfg = cfg.reference_table()
    return cfg.validate()


def _print_summary(result) -> None:
    for rule, reports in result.reports.items():
        print(f"[{result.problem.name} / {rule}]")
        print(f"{'epsilon':>10} {'n':>3} {'mu':>12} {'E1':>12} {'E2':>12}")
        for s in summarize(reports):
            print(f"{s.epsilon:>10.1e} {s.count:>3d} {s.mu:>12.4e} {s.E1:>12.4e} {s.E2:>12.4e}")


def _load_reports(path: Path) -> list[ErrorReport]:
    rows, _ = read_rows(path, ("epsilon", "mu", "E1", "E2", "seed"))
    try:
        return [ErrorReport(float(e), float(m), path.stem, float(a), float(b), int(s)) for e, m, a, b, s in rows]
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from None


def _cmd_rate(args) -> int:
    for path in args.csv:
        try:
            reports = [r for r in _load_reports(path) if args.eps_min <= r.epsilon <= args.eps_max]
        except OSError as exc:
            raise ConfigError(f"cannot read {path}: {exc}") from None
        try:
            slope = fit_rate(reports)
        except ValueError as exc:
            raise ConfigError(f"{path}: {exc}") from None
        print(f"{path}: slope {slope:.4f}")
    return EXIT_OK


def _cmd_run(args) -> int:
    cfg = resolve_config(args)
    result = run_sweep(cfg)
    files = write_outputs(result, cfg)
    _print_summary(result)
    print(f"wrote {len(files)} files to {cfg.out_dir}")
    for e in result.events:
        if e["event"] == "infeasible":
            print(f"skipped {e['rule']} eps={e['epsilon']:g} seed={e['seed']}: {e['message']}", file=sys.stderr)
    bad = result.infeasible_rules()
    if bad:
        print(f"discrepancy principle infeasible for every cell of: {', '.join(bad)}", file=sys.stderr)
        return EXIT_INFEASIBLE
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "rate":
            return _cmd_rate(args)
        return _cmd_run(args)
    except (ConfigError, GridError, DomainError, QuadratureLayoutError, DegenerateDataError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DiscrepancyInfeasibleError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except NumericalFailure as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
