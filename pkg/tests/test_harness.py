import csv
import json

import pytest

from qsmoothboost.dataset import read_sample
from qsmoothboost.errors import ConfigurationError
from qsmoothboost.harness import (EXIT_ABNORMAL, EXIT_INVARIANT, EXIT_OK, EXIT_USAGE, RESULT_COLUMNS,
                                  ExperimentConfig, fit_exponents, invariant_violations, load_config,
                                  parse_config_text, run_single, sweep)
from qsmoothboost.harness.cli import main
from qsmoothboost.harness.config import config_keys
from qsmoothboost.harness.runner import exit_code_for

SEPARABLE = ["--booster", "smoothboost", "--task", "threshold", "--gamma", "0.4", "--m", "64"]


def test_parse_config_text():
    vals = parse_config_text("""
        # comment
        booster = qsmoothboost
        gamma = 3/16
        seeds = 0..3
        sweep_m = 64, 128
        shortcut = true
        m = from-planner
    """)
    assert vals["gamma"] == 0.1875 and vals["seeds"] == (0, 1, 2, 3)
    assert vals["sweep_m"] == (64, 128) and vals["shortcut"] is True and vals["m"] == "from-planner"


@pytest.mark.parametrize("text,key", [("gamma = x", "gamma"), ("W = 2.5", "W"), ("colour = red", "colour"),
                                      ("gamma = 0.2\nbooster = xgb", "booster"), ("gamma", "line 1")])
def test_bad_config_names_key(text, key):
    with pytest.raises(ConfigurationError, match=key):
        ExperimentConfig(**parse_config_text(text))


def test_missing_gamma():
    with pytest.raises(ConfigurationError, match="gamma"):
        load_config(None, {"m": "32"})


def test_file_then_flags(tmp_path):
    path = tmp_path / "exp.cfg"
    path.write_text("gamma = 0.25\nm = 64\n")
    cfg = load_config(str(path), {"m": "128"})
    assert cfg.gamma == 0.25 and cfg.m == 128


def test_every_key_has_a_flag(tmp_path):
    from qsmoothboost.harness.cli import build_parser
    parser = build_parser()
    for key in config_keys():
        args = parser.parse_args(["run", f"--{key}", "1"])
        assert getattr(args, f"key_{key}") == "1"


def test_config_text_round_trip():
    cfg = ExperimentConfig(gamma=0.3, seeds=(1, 2), sweep_gamma=(0.1, 0.2, 0.3), shortcut=True)
    assert load_config(None, parse_config_text(cfg.to_text())) == cfg


def test_planner_m_is_capped_and_reported():
    cfg = ExperimentConfig(gamma=0.1875, m="from-planner", m_cap=256)
    m, planned = cfg.resolved_m()
    assert m == 256 and planned > 10**6


def test_cli_run_separable(tmp_path, capsys):
    out = tmp_path / "r"
    assert main(["run", *SEPARABLE, "--output", str(out)]) == EXIT_OK
    data = json.loads((out / "smoothboost_classical_m64_seed0.json").read_text())
    assert data["empirical_error"] < data["config"]["kappa"]
    with open(out / "smoothboost_classical_m64_seed0.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert tuple(rows[0]) == RESULT_COLUMNS and rows[0]["status"] == "terminated"


def test_cli_missing_gamma(tmp_path, capsys):
    assert main(["run", "--m", "32", "--output", str(tmp_path)]) == EXIT_USAGE
    assert "gamma" in capsys.readouterr().err


def test_cli_usage_errors(capsys):
    assert main(["verify", "nonexistent"]) == EXIT_USAGE
    assert main(["frobnicate"]) == EXIT_USAGE
    assert main(["run", "--gamma", "0.2", "--W", "many"]) == EXIT_USAGE


def test_byte_identical_csv(tmp_path):
    for d in ("a", "b"):
        assert main(["run", *SEPARABLE, "--seeds", "3", "--output", str(tmp_path / d)]) == EXIT_OK
    for name in ("smoothboost_classical_m64_seed3.csv", "smoothboost_classical_m64_seed3_iterations.csv",
                 "smoothboost_classical_m64_seed3.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_cli_abnormal_exit(tmp_path):
    args = ["run", "--booster", "qsmoothboost", "--backend", "cost-model", "--gamma", "0.2",
            "--m", "64", "--cap", "2", "--output", str(tmp_path)]
    assert main(args) == EXIT_ABNORMAL


def test_invariant_exit_code():
    rep = run_single(ExperimentConfig(gamma=0.4, task="threshold", m=64), 0)
    assert exit_code_for(rep) == EXIT_OK and not invariant_violations(rep)
    rep.iterations[0].max_D = 1.0
    assert exit_code_for(rep) == EXIT_INVARIANT


def test_cli_gen_and_report(tmp_path, capsys):
    assert main(["gen", "--gamma", "0.2", "--m", "16", "--seeds", "0,1", "--output", str(tmp_path)]) == 0
    S = read_sample(tmp_path / "majority_m16_seed0.csv")
    assert S.m == 16 and S.n == 20
    for seed in ("0", "1"):
        main(["run", *SEPARABLE, "--seeds", seed, "--output", str(tmp_path)])
    capsys.readouterr()
    assert main(["report", str(tmp_path), "--out", str(tmp_path / "summary.txt")]) == 0
    lines = (tmp_path / "summary.txt").read_text().splitlines()
    assert lines[0].startswith("booster,backend,m,gamma,epsilon,runs")
    assert lines[1].split(",")[5] == "2"
    assert main(["report", str(tmp_path / "missing")]) == EXIT_USAGE


def test_cli_verify(capsys):
    assert main(["verify", "stateprep"]) == EXIT_OK
    assert "max amplitude deviation" in capsys.readouterr().out


def dummy_runner(cfg, seed, m):
    return {"booster": "dummy", "backend": "none", "m": m, "gamma": repr(cfg.gamma),
            "epsilon": repr(cfg.epsilon), "seed": seed, "T": 1, "empirical_error": "0.0",
            "heldout_error": "", "oracle_queries": 1000, "weak_calls": 1, "status": "terminated",
            "total_queries": 1000 + seed}


def test_sweep_constant_dummy():
    cfg = ExperimentConfig(gamma=0.2, sweep_m=(64, 128, 256, 512), seeds=(0, 1, 2), workers=2)
    res = sweep(cfg, run_cell=dummy_runner)
    assert len(res.rows) == 12
    assert abs(res.fits["m"].exponent) < 1e-3
    assert res.csv().splitlines()[0] == ",".join(RESULT_COLUMNS)


def test_sweep_needs_three_points():
    cfg = ExperimentConfig(gamma=0.2, sweep_m=(64, 128))
    with pytest.raises(ConfigurationError, match="sweep_m"):
        sweep(cfg, run_cell=dummy_runner)
    with pytest.raises(ConfigurationError, match="sweep"):
        sweep(ExperimentConfig(gamma=0.2, fit=()), run_cell=dummy_runner)


def test_fit_recovers_known_exponents():
    rows = [{"m": m, "gamma": g, "total_queries": 7 * m**0.5 * (1 / g) ** 4}
            for m in (64, 256, 1024) for g in (0.1, 0.2, 0.3)]
    fits = fit_exponents(rows, ("m", "gamma"))
    assert fits["m"].exponent == pytest.approx(0.5) and fits["gamma"].exponent == pytest.approx(4)


def test_real_sweep_small(tmp_path):
    cfg = ExperimentConfig(gamma=0.25, booster="smoothboost", k=3, sweep_m=(32, 64, 128), seeds=(0,))
    res = sweep(cfg)
    f = res.fits["m"]
    assert f.ci_low <= f.exponent <= f.ci_high and f.points == 3
