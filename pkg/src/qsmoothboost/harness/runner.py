"""Single experiment runs: pick the booster, run it, check invariants, write JSON and CSV."""
from __future__ import annotations

import csv
import io
import math
import os

from ..boost_classical import adaboost_run, iteration_bound, smoothboost_run
from ..boost_quantum import SUM_SLACK, qsmoothboost_run
from ..dataset import draw_sample, generalization_error_estimate
from ..errors import BoostLabError, ConfigurationError, DomainError, StatisticalAnomalyError
from ..report import RunReport
from ..weak_learn import MeasuringQuantumLearner, StumpLearner
from .config import ExperimentConfig

RESULT_COLUMNS = ("booster", "backend", "m", "gamma", "epsilon", "seed", "T", "empirical_error",
                  "heldout_error", "oracle_queries", "weak_calls", "status")

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_ABNORMAL = 3
EXIT_INVARIANT = 4

# held-out points are drawn from a stream independent of the training sample
_HELDOUT_STREAM = 0x5EED


def run_single(config: ExperimentConfig, seed: int, m: int | None = None) -> RunReport:
    """Run one booster on a fresh sample; the report carries held-out error and the planner value."""
    task = config.make_task()
    planned = None
    if m is None:
        m, planned = config.resolved_m()
    S = draw_sample(task, m, seed)
    kappa = config.kappa_value
    cap = config.cap or None
    if config.booster == "adaboost":
        ens, report = adaboost_run(StumpLearner(), S, config.rounds, seed=seed)
    elif config.booster == "smoothboost":
        feed = "weighted" if config.feed == "weighted" else "resample"
        ens, report = smoothboost_run(StumpLearner(), S, kappa, config.gamma, config.W,
                                      cap=cap, seed=seed, feed=feed)
    else:
        feed = "weighted" if config.feed == "weighted" else "quantum"
        ens, report = qsmoothboost_run(MeasuringQuantumLearner(), S, kappa, config.gamma, config.W,
                                       backend=config.backend, delta=config.delta, seed=seed,
                                       feed=feed, cap=cap, memoize=config.memoize,
                                       shortcut=config.shortcut)
    est = generalization_error_estimate(ens, task, config.heldout_factor * m, (_HELDOUT_STREAM, seed))
    report.heldout_error = est.error
    report.config.update(gamma=config.gamma, epsilon=config.epsilon, task=config.task,
                         m_planned=planned, kappa=kappa)
    if config.booster != "qsmoothboost":
        report.backend = None
    return report


def invariant_violations(report: RunReport) -> list[str]:
    """Smoothness, error-bound and final-error checks that must hold in every run."""
    out = []
    cfg = report.config
    m = report.m
    if report.booster == "adaboost":
        return out
    kappa, gamma = cfg["kappa"], cfg["gamma"]
    quantum = report.booster == "qsmoothboost"
    slack = SUM_SLACK if quantum else 1.0
    failed = {f["t"] for f in report.subroutine_failures}
    for r in report.iterations:
        if r.t in failed:
            continue
        if r.max_D > slack / (kappa * m) * (1 + 1e-12):
            out.append(f"smoothness at t={r.t}: max D = {r.max_D!r}")
        if not r.error_bound_holds():
            out.append(f"error bound at t={r.t}: {r.ensemble_wrong} wrong > {r.sum_M_next!r}")
    if report.status == "terminated" and not failed:
        if report.final_wrong >= slack * kappa * m:
            out.append(f"final empirical error {float(report.empirical_error)} not below {slack}*kappa")
        if report.weak_guarantee_held and report.T >= iteration_bound(kappa, gamma, slack):
            out.append(f"T = {report.T} not below the iteration bound")
    return out


def result_row(report: RunReport) -> dict:
    cfg = report.config
    return {
        "booster": report.booster,
        "backend": report.backend or "classical",
        "m": report.m,
        "gamma": repr(cfg.get("gamma")),
        "epsilon": repr(cfg.get("epsilon")),
        "seed": cfg.get("seed"),
        "T": report.T,
        "empirical_error": repr(float(report.empirical_error)),
        "heldout_error": "" if report.heldout_error is None else repr(report.heldout_error),
        "oracle_queries": report.ledger.get("oracle_queries", 0),
        "weak_calls": report.ledger.get("weak_learner_calls", 0),
        "status": report.status,
    }


def results_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=RESULT_COLUMNS, lineterminator="\n")
    w.writeheader()
    for row in rows:
        w.writerow(row)
    return buf.getvalue()


def run_stem(report: RunReport) -> str:
    backend = report.backend or "classical"
    return f"{report.booster}_{backend}_m{report.m}_seed{report.config.get('seed')}"


def write_report(report: RunReport, out_dir: str) -> list[str]:
    os.makedirs(out_dir, exist_ok=True)
    stem = os.path.join(out_dir, run_stem(report))
    paths = [stem + ".json", stem + ".csv", stem + "_iterations.csv"]
    with open(paths[0], "w") as fh:
        fh.write(report.to_json() + "\n")
    with open(paths[1], "w") as fh:
        fh.write(results_csv([result_row(report)]))
    with open(paths[2], "w") as fh:
        fh.write(report.iterations_csv())
    return paths


def exit_code_for(report: RunReport) -> int:
    if invariant_violations(report):
        return EXIT_INVARIANT
    return EXIT_OK if report.ok else EXIT_ABNORMAL


def run_experiment(config: ExperimentConfig, out_dir: str | None = None, log=print) -> int:
    """Run every configured seed; write per-run files; return the CLI exit code."""
    out_dir = config.output if out_dir is None else out_dir
    try:
        m, planned = config.resolved_m()
    except (DomainError, ConfigurationError) as exc:
        log(f"usage error: {exc}")
        return EXIT_USAGE
    if planned is not None:
        log(f"planner m = {planned}; running with m = {m}")
    worst = EXIT_OK
    for seed in config.seeds:
        try:
            report = run_single(config, seed, m)
        except (DomainError, ConfigurationError) as exc:
            log(f"usage error: {exc}")
            return EXIT_USAGE
        except (StatisticalAnomalyError, BoostLabError) as exc:
            log(f"seed {seed}: abnormal termination: {exc}")
            worst = max(worst, EXIT_ABNORMAL)
            continue
        report.config["m_planned"] = planned
        write_report(report, out_dir)
        code = exit_code_for(report)
        for v in invariant_violations(report):
            log(f"seed {seed}: invariant violated: {v}")
        log(f"seed {seed}: {report.status} T={report.T} "
            f"empirical={float(report.empirical_error):.4f} heldout={report.heldout_error:.4f}")
        worst = max(worst, code)
    return worst


def planned_cap(config: ExperimentConfig) -> int:
    """Iteration cap the chosen booster uses by default."""
    kappa = config.kappa_value
    if config.booster == "qsmoothboost":
        return math.ceil(2.2 * math.ceil(iteration_bound(kappa, config.gamma)))
    return math.ceil(iteration_bound(kappa, config.gamma))
