"""Experiment execution: single cells, noise sweeps and their flat-file outputs."""
from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from ..coefficients import (
    AffineDiffusion,
    AnalyticTimeFunction,
    ConstantDiffusion,
    TabulatedDiffusion,
    TimeGrid,
    TimeSeries,
    build_phi_table,
)
from ..errors import ConfigError, DiscrepancyInfeasibleError
from ..io import fmt, read_grid_function, read_time_series, write_rows, write_solution
from ..noise import NoiseSpec, perturb
from ..operator import ProblemDefinition
from ..regularization import RegularizationRule, RegularizedSolution, regularize
from ..spectral import GridFunction, sine_transform, synthesize
from . import problems
from .config import RunConfig
from .metrics import ErrorReport, error_metrics, summarize

NOISE_SPLIT = "SeedSequence(seed).spawn(2): child 0 -> spatial noise on g, child 1 -> temporal noise on phi"


@dataclass(frozen=True, eq=False)
class CellResult:
    solution: RegularizedSolution
    f_reg: GridFunction
    report: Optional[ErrorReport]


def run_cell(
    problem: ProblemDefinition,
    epsilon: float,
    seed: int,
    rule: RegularizationRule,
    phi_mode: str = "signed",
    gnorm_sqrt_pi: bool = False,
) -> CellResult:
    """Perturb the data, tabulate ``Phi(n, phi_eps)`` and apply the rule.

    Exact (``epsilon = 0``) analytic weights keep their closed-form table;
    noisy weights are tabulated and integrated with Simpson's rule.
    """
    spec = NoiseSpec(epsilon, seed, phi_mode, gnorm_sqrt_pi)
    g_eps, phi_eps = perturb(problem.g, problem.phi, spec)
    table = build_phi_table(problem.a, phi_eps, problem.N)
    sol = regularize(
        sine_transform(g_eps, problem.N), table, rule, epsilon,
        seed=seed, phi_mode=phi_mode, gnorm_sqrt_pi=gnorm_sqrt_pi,
        problem=problem.name, variant=problem.variant, N=problem.N,
        K=problem.spatial_grid.K, L=problem.time_grid.L,
    )
    f_reg = synthesize(sol.coeffs, problem.spatial_grid)
    report = None
    if problem.f_exact is not None:
        E1, E2 = error_metrics(f_reg, problem.f_exact)
        report = ErrorReport(epsilon, sol.mu, rule.tag, E1, E2, seed)
    return CellResult(sol, f_reg, report)


# -- problem construction ----------------------------------------------------


def _diffusion_from_spec(text: str, cfg: RunConfig, tgrid: TimeGrid):
    kind, *args = text.split() or [""]
    if kind == "csv":
        if not args:
            raise ConfigError("a = csv needs a path")
        series = read_time_series(cfg.path(args[0]))
        if series.grid != tgrid:
            raise ConfigError("tabulated a(t) must share the time grid of phi")
        return TabulatedDiffusion(series)
    try:
        nums = [float(v) for v in args]
        if kind == "constant":
            return ConstantDiffusion(*nums)
        if kind == "affine":
            return AffineDiffusion(*nums)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad diffusion spec {text!r}: {exc}") from None
    raise ConfigError(f"unknown diffusion spec {text!r}; use constant, affine or csv")


def _weight_from_spec(text: str, cfg: RunConfig) -> TimeSeries:
    kind, *args = text.split() or [""]
    if kind == "csv":
        if not args:
            raise ConfigError("phi = csv needs a path")
        return read_time_series(cfg.path(args[0]))
    try:
        if kind == "constant":
            func = AnalyticTimeFunction.constant(float(args[0]) if args else 1.0)
        elif kind == "polynomial":
            func = AnalyticTimeFunction.polynomial([float(c) for c in args])
        elif kind == "exp-minus-one":
            func = AnalyticTimeFunction.exp_minus_one()
        else:
            raise ConfigError(f"unknown phi spec {text!r}")
    except ValueError:
        raise ConfigError(f"bad phi spec {text!r}") from None
    return TimeSeries.from_function(TimeGrid(cfg.L, cfg.T), func)


def build_problem(cfg: RunConfig) -> ProblemDefinition:
    if cfg.problem != "custom":
        return problems.build(cfg.problem, cfg.K, cfg.L, cfg.N, cfg.variant)
    phi = _weight_from_spec(cfg.phi, cfg)
    a = _diffusion_from_spec(cfg.a, cfg, phi.grid)
    try:
        g = read_grid_function(cfg.path(cfg.g))
        f = read_grid_function(cfg.path(cfg.f)) if cfg.f else None
    except OSError as exc:
        raise ConfigError(f"cannot read data file: {exc}") from None
    if f is not None and f.grid != g.grid:
        raise ConfigError("exact source and data must share the spatial grid")
    return problems.custom(a, phi, g, cfg.N, f)


# -- sweeps ------------------------------------------------------------------


@dataclass(eq=False)
class SweepResult:
    problem: ProblemDefinition
    reports: dict[str, list[ErrorReport]]
    profiles: dict[tuple[str, float], CellResult]
    events: list[dict] = field(default_factory=list)

    def infeasible_rules(self) -> list[str]:
        """Rules for which no cell produced a solution."""
        done = {rule for rule, _ in self.profiles}
        return [r for r in self.reports if r not in done]


def _event(kind: str, **data) -> dict:
    return {"event": kind, **data}


def run_sweep(cfg: RunConfig, problem: Optional[ProblemDefinition] = None) -> SweepResult:
    """Run every (rule, noise level, seed) cell; infeasible cells are skipped and logged."""
    cfg = cfg.validate()
    rules = cfg.resolve_rules()
    events = [_event("config", **cfg.as_dict()), _event("noise_streams", rule=NOISE_SPLIT)]
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        if problem is None:
            problem = build_problem(cfg)
        reports: dict[str, list[ErrorReport]] = {name: [] for name in rules}
        profiles: dict[tuple[str, float], CellResult] = {}
        for name, rule in rules.items():
            for eps in cfg.epsilons:
                for seed in cfg.seeds:
                    try:
                        cell = run_cell(problem, eps, seed, rule, cfg.phi_mode, cfg.gnorm_sqrt_pi)
                    except DiscrepancyInfeasibleError as exc:
                        events.append(_event("infeasible", rule=name, epsilon=eps, seed=seed, message=str(exc)))
                        continue
                    if cell.report is not None:
                        reports[name].append(cell.report)
                    profiles.setdefault((name, eps), cell)
    notes = problem.notes
    events.insert(1, _event(
        "problem", name=problem.name, variant=problem.variant, N=problem.N,
        N_requested=notes.get("N_requested", problem.N), N_clamped=bool(notes.get("N_clamped", False)),
        K=problem.spatial_grid.K, L=problem.time_grid.L, T=problem.T,
    ))
    seen = set()
    for w in caught:
        msg = f"{w.category.__name__}: {w.message}"
        if msg not in seen:
            seen.add(msg)
            events.append(_event("warning", message=msg))
    return SweepResult(problem, reports, profiles, events)


def run_example1(cfg: RunConfig) -> SweepResult:
    if cfg.problem != "example1":
        raise ConfigError(f"run_example1 needs problem = example1, got {cfg.problem!r}")
    return run_sweep(cfg)


def run_example2(cfg: RunConfig) -> SweepResult:
    if cfg.problem != "example2":
        raise ConfigError(f"run_example2 needs problem = example2, got {cfg.problem!r}")
    return run_sweep(cfg)


def _eps_label(eps: float) -> str:
    return format(eps, ".6g")


def write_outputs(result: SweepResult, cfg: RunConfig) -> list[Path]:
    """Write per-seed, summary, table, profile and solution CSVs plus the JSON-lines log."""
    out = Path(cfg.out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"cannot create output directory {out}: {exc}") from None
    name = result.problem.name
    written: list[Path] = []
    summaries = {}
    for rule, reports in result.reports.items():
        rows = [(r.epsilon, r.mu, r.E1, r.E2, r.seed) for r in reports]
        written.append(write_rows(out / f"{name}_{rule}.csv", ("epsilon", "mu", "E1", "E2", "seed"), rows))
        summary = summarize(reports)
        summaries[rule] = {s.epsilon: s for s in summary}
        written.append(write_rows(
            out / f"{name}_{rule}_summary.csv",
            ("epsilon", "count", "mu_median", "E1_median", "E2_median", "E1_iqr", "E2_iqr"),
            [(s.epsilon, s.count, s.mu, s.E1, s.E2, s.E1_iqr, s.E2_iqr) for s in summary],
        ))
    if any(summaries.values()):
        header = ["epsilon"]
        for rule in summaries:
            header += [f"E1_{rule}", f"E2_{rule}"]
        rows = []
        for eps in cfg.epsilons:
            row = [eps]
            for rule, by_eps in summaries.items():
                s = by_eps.get(eps)
                row += [s.E1, s.E2] if s else [math.nan, math.nan]
            rows.append(row)
        written.append(write_rows(out / f"{name}_table.csv", header, rows))
    exact = result.problem.f_exact
    x = result.problem.spatial_grid.nodes
    for (rule, eps), cell in result.profiles.items():
        label = _eps_label(eps)
        f_ex = exact.values if exact is not None else np.full(x.size, math.nan)
        written.append(write_rows(
            out / "profiles" / f"{name}_{rule}_eps{label}.csv",
            ("x", "f_exact", "f_regularized"), zip(x, f_ex, cell.f_reg.values),
        ))
        written.append(write_solution(out / "solutions" / f"{name}_{rule}_eps{label}.csv", cell.solution))
    log = out / "run_log.jsonl"
    events = result.events + [_event("outputs", files=[p.relative_to(out).as_posix() for p in written])]
    with log.open("w", encoding="utf-8", newline="\n") as fh:
        for e in events:
            fh.write(json.dumps(e, sort_keys=True, default=fmt) + "\n")
    written.append(log)
    return written


def sweep(cfg: RunConfig) -> list[Path]:
    """Run the configured sweep and write all outputs; returns the written paths."""
    return write_outputs(run_sweep(cfg), cfg)
