"""Ensembles and per-run reports shared by all boosters."""
from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np


@dataclass
class Ensemble:
    """sign(sum_t w_t h_t(x)) with sign(0) = +1."""

    members: list = field(default_factory=list)
    weights: list = field(default_factory=list)

    def add(self, h, weight: float = 1.0) -> None:
        self.members.append(h)
        self.weights.append(weight)

    @property
    def T(self) -> int:
        return len(self.members)

    @property
    def unit_weights(self) -> bool:
        return all(w == 1 for w in self.weights)

    def margins(self, points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        if pts.ndim == 1:
            pts = pts[None, :]
        if self.unit_weights:
            total = np.zeros(len(pts), dtype=np.int64)
            for h in self.members:
                total += np.asarray(h.predict(pts), dtype=np.int64)
            return total
        total = np.zeros(len(pts))
        for h, w in zip(self.members, self.weights):
            total += w * np.asarray(h.predict(pts), dtype=float)
        return total

    def predict(self, points: np.ndarray) -> np.ndarray:
        return np.where(self.margins(points) >= 0, 1, -1)

    def __call__(self, point) -> int:
        return int(self.predict(np.asarray(point, dtype=float)[None, :])[0])

    def describe(self) -> list[str]:
        return [getattr(h, "identifier", repr(h)) for h in self.members]


ITERATION_FIELDS = ("t", "sum_M", "max_D", "weak_error", "weak_ok", "ensemble_error",
                    "sum_M_next", "estimate", "estimate_ok")


@dataclass
class IterationRecord:
    t: int
    sum_M: float
    max_D: float
    weak_error: float
    weak_ok: bool
    ensemble_wrong: int
    m: int
    sum_M_next: float
    estimate: float | None = None
    estimate_ok: bool | None = None

    @property
    def ensemble_error(self) -> Fraction:
        return Fraction(self.ensemble_wrong, self.m)

    def error_bound_holds(self) -> bool:
        """wrong/m <= sum_M_next/m, compared without dividing."""
        return self.ensemble_wrong <= self.sum_M_next * (1 + 1e-12)

    def row(self) -> dict:
        return {
            "t": self.t,
            "sum_M": repr(self.sum_M),
            "max_D": repr(self.max_D),
            "weak_error": repr(self.weak_error),
            "weak_ok": int(self.weak_ok),
            "ensemble_error": repr(float(self.ensemble_error)),
            "sum_M_next": repr(self.sum_M_next),
            "estimate": "" if self.estimate is None else repr(self.estimate),
            "estimate_ok": "" if self.estimate_ok is None else int(self.estimate_ok),
        }


@dataclass
class RunReport:
    booster: str
    config: dict
    m: int
    T: int = 0
    status: str = "running"
    iterations: list = field(default_factory=list)
    final_sum: float | None = None
    final_estimate: float | None = None
    final_wrong: int = 0
    heldout_error: float | None = None
    ledger: dict = field(default_factory=dict)
    backend: str | None = None
    epsilon_rel: float | None = None
    delta_sub: float | None = None
    subroutine_failures: list = field(default_factory=list)
    alphas: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    @property
    def empirical_error(self) -> Fraction:
        return Fraction(self.final_wrong, self.m)

    @property
    def ok(self) -> bool:
        return self.status == "terminated"

    @property
    def weak_guarantee_held(self) -> bool:
        return all(r.weak_ok for r in self.iterations)

    def per_iteration(self) -> dict:
        return {
            "sum_M": [r.sum_M for r in self.iterations],
            "max_D": [r.max_D for r in self.iterations],
            "weak_error": [r.weak_error for r in self.iterations],
            "ensemble_error": [float(r.ensemble_error) for r in self.iterations],
            "sum_M_next": [r.sum_M_next for r in self.iterations],
            "estimate": [r.estimate for r in self.iterations],
        }

    def to_dict(self, include_clock: bool = False) -> dict:
        ledger = dict(self.ledger)
        if not include_clock:
            ledger.pop("wall_clock", None)
        doc = {
            "booster": self.booster,
            "config": self.config,
            "m": self.m,
            "T": self.T,
            "status": self.status,
            "per_iteration": self.per_iteration(),
            "final_sum": self.final_sum,
            "final_estimate": self.final_estimate,
            "empirical_error": float(self.empirical_error),
            "heldout_error": self.heldout_error,
            "ledger": ledger,
        }
        if self.backend is not None:
            doc.update(backend=self.backend, epsilon_rel=self.epsilon_rel,
                       delta_sub=self.delta_sub, subroutine_failures=self.subroutine_failures)
        if self.alphas:
            doc["alphas"] = self.alphas
        if self.notes:
            doc["notes"] = self.notes
        return doc

    def to_json(self, include_clock: bool = False) -> str:
        return json.dumps(self.to_dict(include_clock), indent=2, sort_keys=True)

    def iterations_csv(self) -> str:
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=ITERATION_FIELDS, lineterminator="\n")
        w.writeheader()
        for r in self.iterations:
            w.writerow(r.row())
        return buf.getvalue()
