import json
import math
import warnings

import numpy as np
import pytest

from inverse_source.coefficients import TimeSeries, build_phi_table
from inverse_source.errors import ConfigError, DegenerateDataError
from inverse_source.harness import (
    REFERENCE_EPSILONS,
    ErrorReport,
    RunConfig,
    error_metrics,
    fit_rate,
    load_config,
    run_cell,
    run_example1,
    run_example2,
    run_sweep,
    summarize,
    sweep,
)
from inverse_source.harness.config import parse_seeds
from inverse_source.io import (
    read_grid_function,
    read_phi_table,
    read_rows,
    read_solution,
    read_time_series,
    write_grid_function,
    write_phi_table,
    write_solution,
    write_time_series,
)
from inverse_source.regularization import APosteriori, APriori, Fixed
from inverse_source.spectral import SpatialGrid, sine_transform, sobolev_norm

E1_HALF_SIN2X = 0.35179877236514593  # direct summation, K = 100


def quiet(fn, *args, **kwargs):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return fn(*args, **kwargs)


# -- metrics -----------------------------------------------------------------


def test_error_metrics_examples():
    grid = SpatialGrid(100)
    f = grid.sample(lambda x: 0.5 * np.sin(2 * x))
    assert error_metrics(f, f) == (0.0, 0.0)
    assert error_metrics(f * 2.0, f)[1] == pytest.approx(1.0, rel=1e-15)
    E1, E2 = error_metrics(grid.sample(np.zeros_like), f)
    assert E1 == pytest.approx(E1_HALF_SIN2X, rel=1e-14)
    assert E2 == 1.0


def test_error_metrics_zero_reference():
    grid = SpatialGrid(10)
    with pytest.raises(DegenerateDataError):
        error_metrics(grid.sample(np.sin), grid.sample(np.zeros_like))


def test_error_report_nonnegative():
    with pytest.raises(ValueError):
        ErrorReport(0.1, 0.1, "apriori", -1.0, 0.0, 1)


def _synthetic(fn):
    return [ErrorReport(e, 1.0, "x", fn(e), 1.0, s) for e in (1e-1, 1e-2, 1e-3, 1e-4) for s in (1, 2)]


def test_fit_rate_synthetic():
    assert fit_rate(_synthetic(lambda e: e)) == pytest.approx(1.0, rel=1e-12)
    assert fit_rate(_synthetic(lambda e: 3 * math.sqrt(e))) == pytest.approx(0.5, rel=1e-12)
    with pytest.raises(ValueError):
        fit_rate(_synthetic(lambda e: e)[:4])


def test_summarize_median_and_iqr():
    reps = [ErrorReport(0.1, 1.0, "x", v, v, i) for i, v in enumerate((1.0, 2.0, 3.0, 4.0, 100.0))]
    (row,) = summarize(reps)
    assert row.count == 5 and row.E1 == 3.0 and row.E1_iqr == 2.0


# -- problems ----------------------------------------------------------------


def test_example1_variants(ex1_literal, ex1_consistent):
    c_lit = sine_transform(ex1_literal.g, ex1_literal.N).coeffs
    c_con = sine_transform(ex1_consistent.g, ex1_consistent.N).coeffs
    assert c_lit[1] == pytest.approx((math.e - 1) / 10, rel=1e-13)
    assert c_con[1] == pytest.approx(0.5 * 0.29457214763624576, rel=1e-12)
    assert ex1_literal.N == 99 and ex1_literal.notes["N_clamped"]
    assert ex1_literal.f_exact_coeffs.coeffs[1] == 0.5


def test_example2_sources(ex2_stated, ex2_weighted):
    n = np.arange(1, 4)
    true_phi = (0.37080785290822887, 0.089045262522574421, 0.038029534568200101)
    np.testing.assert_allclose(ex2_stated.f_exact_coeffs.coeffs[:3], math.exp(3) / np.array(true_phi), rtol=1e-12)
    np.testing.assert_allclose(ex2_weighted.f_exact_coeffs.coeffs[:3], math.exp(3) * n ** 2 / -np.expm1(-2.0 * n ** 2), rtol=1e-12)
    for p in (ex2_stated, ex2_weighted):
        assert np.all(p.f_exact_coeffs.coeffs[3:] == 0)
        np.testing.assert_allclose(sine_transform(p.g, 5).coeffs, [math.exp(3)] * 3 + [0, 0], atol=1e-12)


def test_example2_smoothness_bound(ex2_stated, ex2_weighted):
    # the bound 5500 holds for the affine-weight source but not for h = 1
    assert sobolev_norm(ex2_weighted.f_exact_coeffs, 2) < 5500
    assert sobolev_norm(ex2_stated.f_exact_coeffs, 2) > 5500


def test_unknown_variant():
    from inverse_source.harness.problems import example1, example2

    with pytest.raises(ConfigError):
        example1(variant="x")
    with pytest.raises(ConfigError):
        example2(variant="x")


# -- cells and sweeps --------------------------------------------------------


def test_exact_data_round_trip_consistent(ex1_consistent, ex2_stated):
    for p in (ex1_consistent, ex2_stated):
        cell = run_cell(p, 0.0, 0, Fixed(1e-8))
        assert cell.report.E2 <= 1e-6


def test_report_consistency_identity(ex2_stated):
    res = quiet(run_sweep, RunConfig(problem="example2", epsilons=(1e-1, 1e-3), seeds=(1, 2, 3)), ex2_stated)
    f = ex2_stated.f_exact.values
    for reps in res.reports.values():
        for r in reps:
            assert abs(r.E1 * math.sqrt(f.size) - r.E2 * math.sqrt(np.sum(f ** 2))) <= 1e-12 * r.E2 * math.sqrt(np.sum(f ** 2))


def test_example1_reference_values():
    cfg = RunConfig(problem="example1", epsilons=(1e-1, 1e-4, 1e-5), rules=("apriori", "aposteriori"))
    res = quiet(run_example1, cfg)
    pri = {s.epsilon: s for s in summarize(res.reports["apriori"])}
    post = {s.epsilon: s for s in summarize(res.reports["aposteriori"])}
    # same order of magnitude as the reference single draws
    assert 0.1 <= pri[1e-1].E1 / 4.84e-2 <= 10
    assert 0.1 <= pri[1e-1].E2 / 1.38e-1 <= 10
    assert 0.5 <= post[1e-5].E2 / post[1e-4].E2 <= 2


def test_example2_reference_values():
    cfg = RunConfig(problem="example2", epsilons=REFERENCE_EPSILONS, rules=("apriori", "aposteriori"))
    res = quiet(run_example2, cfg)
    pri = {s.epsilon: s for s in summarize(res.reports["apriori"])}
    post = summarize(res.reports["aposteriori"])
    assert 0.1 <= pri[1e-1].E2 / 1.2378e-1 <= 10
    assert 0.1 <= post[-1].E2 / 1.328e-5 <= 10
    e2 = [s.E2 for s in post]
    assert all(a > b for a, b in zip(e2, e2[1:]))


def test_rate_apriori_high_smoothness_regime(ex2_stated):
    """k > 2 switches the a priori rule to mu = (eps/M)^(1/2)."""
    eps = (1e-2, 5e-3, 1e-3, 5e-4, 1e-4, 5e-5, 1e-5)
    reps = [run_cell(ex2_stated, e, s, APriori(5500.0, 3.0)).report for e in eps for s in range(1, 11)]
    assert fit_rate(reps) >= 0.45


def test_rate_aposteriori(ex2_stated):
    eps = (1e-2, 5e-3, 1e-3, 5e-4, 1e-4, 5e-5, 1e-5)
    reps = [run_cell(ex2_stated, e, s, APosteriori(1.1)).report for e in eps for s in range(1, 11)]
    assert fit_rate(reps) >= 0.45


def test_wrong_problem_for_runner():
    with pytest.raises(ConfigError):
        run_example1(RunConfig(problem="example2"))
    with pytest.raises(ConfigError):
        run_example2(RunConfig(problem="example1"))


def test_sweep_counting_and_files(tmp_path):
    cfg = RunConfig(problem="example2", epsilons=(1e-2,), seeds=tuple(range(1, 11)), out_dir=str(tmp_path))
    quiet(sweep, cfg)
    for rule in ("apriori", "aposteriori"):
        rows, _ = read_rows(tmp_path / f"example2_{rule}.csv", ("epsilon", "mu", "E1", "E2", "seed"))
        assert len(rows) == 10 and [int(r[4]) for r in rows] == list(range(1, 11))
        summary, _ = read_rows(tmp_path / f"example2_{rule}_summary.csv",
                               ("epsilon", "count", "mu_median", "E1_median", "E2_median", "E1_iqr", "E2_iqr"))
        assert summary[0][1] == "10"
        assert float(summary[0][4]) == pytest.approx(np.median([float(r[3]) for r in rows]), rel=1e-15)
        prof, _ = read_rows(tmp_path / "profiles" / f"example2_{rule}_eps0.01.csv", ("x", "f_exact", "f_regularized"))
        assert len(prof) == 101
        coeffs, meta = read_solution(tmp_path / "solutions" / f"example2_{rule}_eps0.01.csv")
        assert coeffs.N == 99 and meta["seed"] == "1" and meta["phi_mode"] == "signed"
    log = [json.loads(line) for line in (tmp_path / "run_log.jsonl").read_text().splitlines()]
    kinds = [e["event"] for e in log]
    assert kinds[:3] == ["config", "problem", "noise_streams"]
    assert log[1]["N_clamped"] and log[1]["N_requested"] == 1000 and log[1]["N"] == 99
    assert any("clamped" in e.get("message", "") for e in log)


def test_infeasible_cells_are_logged(tmp_path):
    cfg = RunConfig(problem="example1", epsilons=(5e-1, 1e-1), seeds=(1, 2), rules=("aposteriori",), out_dir=str(tmp_path))
    res = quiet(run_sweep, cfg)
    assert [r.epsilon for r in res.reports["aposteriori"]] == [1e-1, 1e-1]
    assert sum(e["event"] == "infeasible" for e in res.events) == 2
    assert res.infeasible_rules() == []
    cfg_bad = RunConfig(problem="example1", epsilons=(5e-1,), seeds=(1,), rules=("aposteriori",))
    assert quiet(run_sweep, cfg_bad).infeasible_rules() == ["aposteriori"]


def test_reference_table_layout(tmp_path):
    cfg = RunConfig(problem="example2", out_dir=str(tmp_path)).reference_table()
    quiet(sweep, cfg)
    header = ["epsilon", "E1_apriori", "E2_apriori", "E1_paper-formula", "E2_paper-formula",
              "E1_aposteriori", "E2_aposteriori"]
    rows, _ = read_rows(tmp_path / "example2_table.csv", header)
    assert [float(r[0]) for r in rows] == list(REFERENCE_EPSILONS)


def test_output_dir_unwritable(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(ConfigError):
        quiet(sweep, RunConfig(problem="example2", epsilons=(1e-2,), seeds=(1,), out_dir=str(blocker)))


# -- configuration -----------------------------------------------------------


def test_config_validation():
    with pytest.raises(ConfigError):
        RunConfig(epsilons=()).validate()
    with pytest.raises(ConfigError):
        RunConfig(epsilons=(0.0,)).validate()
    with pytest.raises(ConfigError):
        RunConfig(L=101).validate()
    with pytest.raises(ConfigError):
        RunConfig(K=1).validate()
    with pytest.raises(ConfigError):
        RunConfig(rules=()).validate()
    with pytest.raises(ConfigError):
        RunConfig(rules=("fixed",)).validate()
    with pytest.raises(ConfigError):
        RunConfig(tau=0.9).validate()
    with pytest.raises(ConfigError):
        RunConfig(problem="custom").validate()
    with pytest.raises(ConfigError):
        RunConfig(problem="custom", rules=("paper-formula",), a="constant 1", phi="constant 1", g="g.csv").validate()


def test_config_defaults_follow_problem():
    r1 = RunConfig(problem="example1", rules=("apriori", "aposteriori", "paper-formula")).resolve_rules()
    assert r1["apriori"] == APriori(1000.0, 1.0) and r1["aposteriori"].tau == 1.5
    assert r1["paper-formula"].exponent == pytest.approx(9 / 20)
    r2 = RunConfig(problem="example2", rules=("apriori", "aposteriori", "paper-formula")).resolve_rules()
    assert r2["apriori"].M == 5500.0 and r2["aposteriori"].tau == 1.1
    assert r2["paper-formula"].coefficient == pytest.approx(1 / 1100)


def test_parse_seeds():
    assert parse_seeds("1-3, 7") == (1, 2, 3, 7)
    with pytest.raises(ConfigError):
        parse_seeds("a-b")


def test_load_config(tmp_path):
    ini = tmp_path / "run.ini"
    ini.write_text(
        "[problem]\nname = example2\nvariant = affine-weight\n"
        "[spectral]\nK = 64\nN = 20\n"
        "[coefficients]\nL = 50\n"
        "[noise]\nepsilons = 1e-2, 1e-3\nseeds = 1-4\nphi_mode = absolute\ngnorm_sqrt_pi = yes\n"
        "[regularization]\nrules = apriori, fixed\nmu = 0.01\nM = 100\n"
        "[output]\ndir = results\n"
    )
    cfg = load_config(ini).validate()
    assert (cfg.problem, cfg.variant, cfg.K, cfg.N, cfg.L) == ("example2", "affine-weight", 64, 20, 50)
    assert cfg.epsilons == (1e-2, 1e-3) and cfg.seeds == (1, 2, 3, 4)
    assert cfg.phi_mode == "absolute" and cfg.gnorm_sqrt_pi
    assert cfg.resolve_rules()["fixed"].mu == 0.01 and cfg.M == 100
    assert cfg.out_dir == "results"
    assert RunConfig().K == 100 and RunConfig().L == 100 and RunConfig().N == 1000 and RunConfig().T == 1.0


@pytest.mark.parametrize("text", ["[bogus]\nx = 1\n", "[spectral]\nQ = 3\n", "[spectral]\nK = many\n", "no section"])
def test_load_config_errors(tmp_path, text):
    ini = tmp_path / "bad.ini"
    ini.write_text(text)
    with pytest.raises(ConfigError):
        load_config(ini)


# -- flat files and custom problems --------------------------------------------


def test_io_round_trips(tmp_path, ex2_stated):
    g = ex2_stated.g
    assert read_grid_function(write_grid_function(tmp_path / "g.csv", g)).values.tobytes() == g.values.tobytes()
    phi = ex2_stated.phi
    back = read_time_series(write_time_series(tmp_path / "phi.csv", phi))
    assert back.values.tobytes() == phi.values.tobytes() and back.grid == phi.grid
    table = ex2_stated.phi_table()
    tb = read_phi_table(write_phi_table(tmp_path / "phi_table.csv", table))
    assert tb.values.tobytes() == table.values.tobytes() and tb.provenance == table.provenance
    sol = run_cell(ex2_stated, 1e-2, 3, APosteriori(1.1)).solution
    coeffs, meta = read_solution(write_solution(tmp_path / "sol.csv", sol))
    assert coeffs.coeffs.tobytes() == sol.coeffs.coeffs.tobytes()
    assert float(meta["mu"]) == sol.mu and meta["rule"] == "aposteriori" and float(meta["tau"]) == 1.1


def test_io_rejects_bad_files(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("x,v\n0,1\n")
    with pytest.raises(ConfigError):
        read_grid_function(p)
    p.write_text("x,value\n0,0\n1,0\n3.14159,0\n")
    with pytest.raises(ConfigError):
        read_grid_function(p)


def test_custom_problem_matches_registry(tmp_path, ex2_stated):
    write_grid_function(tmp_path / "g.csv", ex2_stated.g)
    write_grid_function(tmp_path / "f.csv", ex2_stated.f_exact)
    write_time_series(tmp_path / "phi.csv", ex2_stated.phi)
    write_time_series(tmp_path / "a.csv", TimeSeries(ex2_stated.phi.grid, 2 * ex2_stated.phi.grid.nodes + 1))
    base = dict(problem="custom", epsilons=(1e-2, 1e-3), seeds=(1, 2), base_dir=str(tmp_path),
                phi="csv phi.csv", g="g.csv", f="f.csv", M=5500.0)
    ref = quiet(run_sweep, RunConfig(problem="example2", epsilons=(1e-2, 1e-3), seeds=(1, 2)))
    affine = quiet(run_sweep, RunConfig(a="affine 2 1", **base))
    tabulated = quiet(run_sweep, RunConfig(a="csv a.csv", **base))
    for rule in ("apriori", "aposteriori"):
        e_ref = [r.E2 for r in ref.reports[rule]]
        assert [r.E2 for r in affine.reports[rule]] == pytest.approx(e_ref, rel=1e-12)
        assert [r.E2 for r in tabulated.reports[rule]] == pytest.approx(e_ref, rel=1e-8)


def test_custom_without_exact_source(tmp_path, ex2_stated):
    write_grid_function(tmp_path / "g.csv", ex2_stated.g)
    cfg = RunConfig(problem="custom", a="constant 1", phi="polynomial 1 0.5", g="g.csv", epsilons=(1e-2,),
                    seeds=(1,), base_dir=str(tmp_path), out_dir=str(tmp_path / "out"))
    quiet(sweep, cfg)
    rows, _ = read_rows(tmp_path / "out" / "profiles" / "custom_apriori_eps0.01.csv", ("x", "f_exact", "f_regularized"))
    assert rows[0][1] == "nan"
    assert not (tmp_path / "out" / "custom_table.csv").exists()


@pytest.mark.parametrize("spec", ["quadratic 1", "affine x y", "csv", ""])
def test_custom_bad_diffusion_spec(tmp_path, spec):
    from inverse_source.harness.runner import build_problem

    with pytest.raises(ConfigError):
        build_problem(RunConfig(problem="custom", a=spec, phi="constant 1", g="g.csv", base_dir=str(tmp_path)))
