"""Grid sweeps over m, gamma and epsilon with log-log scaling fits of the charged queries."""
from __future__ import annotations

import itertools
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from ..errors import ConfigurationError
from .config import AXES, ExperimentConfig
from .runner import result_row, results_csv, run_single


@dataclass(frozen=True)
class ExponentFit:
    axis: str
    exponent: float
    ci_low: float
    ci_high: float
    intercept: float
    points: int

    def to_dict(self) -> dict:
        return {"axis": self.axis, "exponent": self.exponent, "ci": [self.ci_low, self.ci_high],
                "intercept": self.intercept, "points": self.points}


@dataclass
class SweepResult:
    rows: list = field(default_factory=list)  # one result row per (cell, seed), plus total_queries
    fits: dict = field(default_factory=dict)

    def csv(self) -> str:
        return results_csv([{k: r[k] for k in r if k != "total_queries"} for r in self.rows])

    def to_dict(self) -> dict:
        return {"rows": self.rows, "fits": {k: f.to_dict() for k, f in self.fits.items()}}


def regressor(axis: str, value: float) -> float:
    """log m, log(1/gamma), log(1/epsilon)."""
    return math.log(value) if axis == "m" else math.log(1 / value)


def fit_exponents(rows: list[dict], axes: tuple[str, ...], level: float = 0.95) -> dict:
    """Least squares of log(total_queries) on the log regressors of ``axes`` (all rows at once)."""
    y = np.log([float(r["total_queries"]) for r in rows])
    X = np.column_stack([np.ones(len(rows))] + [[regressor(ax, float(r[ax])) for r in rows]
                                                 for ax in axes])
    coef, *_ = np.linalg.lstsq(X, y, rcond=None)
    dof = len(rows) - X.shape[1]
    out = {}
    if dof > 0:
        resid = y - X @ coef
        s2 = float(resid @ resid) / dof
        cov = s2 * np.linalg.pinv(X.T @ X)
        half = stats.t.ppf(0.5 + level / 2, dof) * np.sqrt(np.diag(cov))
    else:
        half = np.full(X.shape[1], np.nan)
    for j, ax in enumerate(axes, 1):
        npts = len({r[ax] for r in rows})
        out[ax] = ExponentFit(ax, float(coef[j]), float(coef[j] - half[j]), float(coef[j] + half[j]),
                              float(coef[0]), npts)
    return out


def grid(config: ExperimentConfig) -> list[dict]:
    axes = config.axes()
    if not axes:
        raise ConfigurationError("sweep_m: a sweep needs at least one nonempty axis")
    names = list(axes)
    return [dict(zip(names, vals)) for vals in itertools.product(*(axes[n] for n in names))]


def _cell_config(config: ExperimentConfig, cell: dict) -> tuple[ExperimentConfig, int | None]:
    kw = {k: v for k, v in cell.items() if k != "m"}
    return config.with_values(**kw), cell.get("m")


def default_cell_runner(config: ExperimentConfig, seed: int, m: int | None) -> dict:
    report = run_single(config, seed, m)
    row = result_row(report)
    row["total_queries"] = report.ledger["total_queries"]
    return row


def sweep(config: ExperimentConfig, run_cell=default_cell_runner, workers: int | None = None
          ) -> SweepResult:
    """Run every (cell, seed); fit exponents for ``config.fit`` axes.

    ``run_cell(config, seed, m)`` returns a result row with a ``total_queries``
    entry; it is injectable so control runs can bypass the boosters.
    """
    cells = grid(config)
    axes = config.axes()
    for ax in config.fit:
        if len(set(axes.get(ax, ()))) < 3:
            raise ConfigurationError(f"sweep_{ax}: fitting the {ax} exponent needs >= 3 axis points")
    jobs = []
    for cell in cells:
        cfg, m = _cell_config(config, cell)
        if m is None:
            m = cfg.resolved_m()[0]
        for seed in config.seeds:
            jobs.append((cfg, seed, m, cell))
    workers = config.workers if workers is None else workers

    def one(job):
        cfg, seed, m, cell = job
        row = dict(run_cell(cfg, seed, m))
        row.update({"m": m, "gamma": row.get("gamma", repr(cfg.gamma)),
                    "epsilon": row.get("epsilon", repr(cfg.epsilon))})
        return row

    with ThreadPoolExecutor(max_workers=workers) as pool:
        rows = list(pool.map(one, jobs))
    result = SweepResult(rows)
    if config.fit:
        result.fits = fit_exponents(rows, tuple(config.fit))
    return result


def write_sweep(result: SweepResult, out_dir: str) -> list[str]:
    os.makedirs(out_dir, exist_ok=True)
    paths = [os.path.join(out_dir, "sweep.csv"), os.path.join(out_dir, "sweep.json")]
    with open(paths[0], "w") as fh:
        fh.write(result.csv())
    with open(paths[1], "w") as fh:
        json.dump(result.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return paths


__all__ = ["AXES", "ExponentFit", "SweepResult", "fit_exponents", "grid", "sweep", "write_sweep"]
