"""Decision-stump weak learners, confidence boosting, and superposed hypothesis evaluation."""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Iterator, Protocol, Sequence

import numpy as np

from .dataset import LabeledExample, LabeledSample
from .errors import ConfigurationError, DomainError, ResourceError
from .ledger import CostLedger
from .qsim.state import StateVector


@dataclass(frozen=True)
class Stump:
    """h(x) = polarity if x[feature] > threshold else -polarity."""

    feature: int
    threshold: float
    polarity: int

    @property
    def identifier(self) -> str:
        return self.describe()

    def predict(self, points: np.ndarray) -> np.ndarray:
        x = np.asarray(points, dtype=float)
        if x.ndim == 1:
            x = x[None, :]
        return np.where(x[:, self.feature] > self.threshold, self.polarity, -self.polarity)

    def __call__(self, point) -> int:
        return self.polarity if float(point[self.feature]) > self.threshold else -self.polarity

    def describe(self) -> str:
        return f"stump feature={self.feature} threshold={self.threshold!r} polarity={self.polarity:+d}"

    @classmethod
    def parse(cls, line: str) -> "Stump":
        m = re.fullmatch(r"\s*stump feature=(\d+) threshold=(\S+) polarity=([+-]?1)\s*", line)
        if not m:
            raise ConfigurationError(f"not a stump description: {line!r}")
        return cls(int(m.group(1)), float(m.group(2)), int(m.group(3)))


@dataclass(frozen=True)
class TargetHypothesis:
    """Wraps a task's target (or its negation) as a hypothesis; used as a planted learner output."""

    task: object
    sign: int = 1

    @property
    def identifier(self) -> str:
        return f"target:{self.task.family}:{self.sign:+d}"

    def predict(self, points):
        return self.sign * self.task.target(points)

    def __call__(self, point) -> int:
        return int(self.predict(np.asarray(point, dtype=float)[None, :])[0])


def _candidate_thresholds(values: np.ndarray) -> np.ndarray:
    distinct = np.unique(values)
    # below-all threshold gives the constant stumps
    return np.concatenate([[distinct[0] - 0.5], (distinct[:-1] + distinct[1:]) / 2])


def _best_stump(points: np.ndarray, labels: np.ndarray, weights: np.ndarray):
    """Minimum-weighted-error stump with the (feature, threshold, +1 first) tie-break.

    Returns the stump and its weighted error. Weights may be integer counts.
    """
    best = None
    for f in range(points.shape[1]):
        col = points[:, f]
        order = np.argsort(col, kind="stable")
        sc, sl, sw = col[order], labels[order], weights[order]
        thr = _candidate_thresholds(sc)
        # weight at or below each threshold, split by label
        cut = np.searchsorted(sc, thr, side="right")
        pos_w = np.concatenate([[0], np.cumsum(np.where(sl > 0, sw, 0))])
        neg_w = np.concatenate([[0], np.cumsum(np.where(sl < 0, sw, 0))])
        pos_le, neg_le = pos_w[cut], neg_w[cut]
        pos_gt, neg_gt = pos_w[-1] - pos_le, neg_w[-1] - neg_le
        # polarity +1 predicts +1 above the threshold
        err_plus = pos_le + neg_gt
        err_minus = neg_le + pos_gt
        for k in range(len(thr)):
            for pol, err in ((1, err_plus[k]), (-1, err_minus[k])):
                if best is None or err < best[1]:
                    best = (Stump(f, float(thr[k]), pol), err)
    return best


def train_stump(examples) -> Stump:
    """Stump with the fewest training mistakes on a multiset of examples."""
    points, labels = _as_arrays(examples)
    stump, err = _best_stump(points, labels, np.ones(len(labels), dtype=np.int64))
    if 2 * err > len(labels):
        stump = Stump(stump.feature, stump.threshold, -stump.polarity)
    return stump


def train_weighted_stump(points: np.ndarray, labels: np.ndarray, weights: np.ndarray) -> Stump:
    """Deterministic stump minimizing error under an explicit distribution over the sample."""
    weights = np.asarray(weights, dtype=float)
    stump, err = _best_stump(np.asarray(points, dtype=float), np.asarray(labels), weights)
    if err > weights.sum() / 2:
        stump = Stump(stump.feature, stump.threshold, -stump.polarity)
    return stump


def _as_arrays(examples) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(examples, LabeledSample):
        return examples.points, examples.labels
    examples = list(examples)
    if not examples:
        raise DomainError("weak learner needs at least one example")
    dims = {len(e.point) for e in examples}
    if len(dims) != 1:
        raise DomainError("all points must share one dimension")
    return (np.array([e.point for e in examples], dtype=float),
            np.array([e.label for e in examples], dtype=np.int64))


def weighted_error(h, S: LabeledSample, D: np.ndarray) -> float:
    """Pr_{i ~ D}[h(x_i) != y_i], summed exactly."""
    wrong = np.asarray(h.predict(S.points)) != S.labels
    return math.fsum(np.asarray(D, dtype=float)[wrong])


@dataclass(frozen=True)
class WeakLearnerSpec:
    gamma: float
    W: int
    kind: str = "classical"

    def __post_init__(self):
        if not 0 < self.gamma < 0.5:
            raise DomainError("gamma must lie in (0, 1/2)")
        if self.W < 1:
            raise DomainError("W must be >= 1")
        if self.kind not in ("classical", "quantum-interface"):
            raise ConfigurationError(f"unknown learner kind {self.kind!r}")


class WeakLearner(Protocol):
    def fit(self, examples: Sequence[LabeledExample]) -> object: ...


class StumpLearner:
    """Classical stump learner; ``fit_weighted`` serves full-information runs."""

    kind = "classical"

    def fit(self, examples):
        return train_stump(examples)

    def fit_weighted(self, S: LabeledSample, D: np.ndarray):
        return train_weighted_stump(S.points, S.labels, D)


class PlantedLearner:
    """Always returns a fixed hypothesis (e.g. the true target)."""

    kind = "classical"

    def __init__(self, hypothesis):
        self.hypothesis = hypothesis

    def fit(self, examples):
        return self.hypothesis

    def fit_weighted(self, S, D):
        return self.hypothesis


class MeasuringQuantumLearner:
    """Quantum-learner interface that measures each quantum example and trains a classical learner."""

    kind = "quantum-interface"

    def __init__(self, classical=None):
        self.classical = classical if classical is not None else StumpLearner()

    def fit_quantum(self, examples, rng: np.random.Generator):
        return self.classical.fit([q.measure(rng) for q in examples])

    def fit(self, examples):
        return self.classical.fit(examples)

    def fit_weighted(self, S, D):
        return self.classical.fit_weighted(S, D)


# -- confidence boosting ---------------------------------------------------

def confidence_runs(delta: float) -> int:
    if not 0 < delta < 1:
        raise DomainError("delta must lie in (0, 1)")
    # ceil(log_3(1/delta)), guarding exact powers of 3 against float round-up
    r = math.ceil(math.log(1 / delta, 3))
    if r > 1 and 3 ** (r - 1) >= 1 / delta * (1 - 1e-12):
        r -= 1
    return max(1, r)


@dataclass
class ConfidenceResult:
    hypothesis: object
    estimated_error: float
    passed: bool
    runs: int
    candidates: list = field(default_factory=list)


def boost_confidence(learner, delta: float, gamma: float, dist_access: Iterator[LabeledExample],
                     W: int, check_budget: int | None = None,
                     ledger: CostLedger | None = None) -> ConfidenceResult:
    """Run ``learner`` on r fresh batches and keep one whose error estimate clears 1/2 - gamma/2.

    ``dist_access`` yields fresh examples from the target distribution. The
    best-scoring candidate is returned (``passed=False``) if none clears.
    """
    r = confidence_runs(delta)
    if check_budget is None:
        check_budget = math.ceil(16 / gamma**2) * math.ceil(math.log2(r / delta))

    def take(n):
        out = []
        for _ in range(n):
            try:
                out.append(next(dist_access))
            except StopIteration:
                raise ResourceError("example source exhausted") from None
        return out

    hyps = []
    for _ in range(r):
        hyps.append(learner.fit(take(W)))
        if ledger is not None:
            ledger.charge(weak_learner_calls=1)
    candidates = []
    for h in hyps:
        check = take(check_budget)
        pts = np.array([e.point for e in check], dtype=float)
        ys = np.array([e.label for e in check])
        err = float(np.count_nonzero(np.asarray(h.predict(pts)) != ys)) / check_budget
        candidates.append((h, err))
    for h, err in candidates:
        if err <= 0.5 - gamma / 2:
            return ConfidenceResult(h, err, True, r, candidates)
    h, err = min(candidates, key=lambda c: c[1])
    return ConfidenceResult(h, err, False, r, candidates)


def example_stream(task, seed) -> Iterator[LabeledExample]:
    rng = np.random.default_rng(seed)
    while True:
        pts = task.draw_points(256, rng)
        for x, y in zip(pts, task.target(pts)):
            yield LabeledExample(tuple(x.tolist()), int(y))


# -- superposed evaluation -------------------------------------------------

class HypothesisTable:
    """Registry giving each hypothesis a basis label for the |h> register."""

    def __init__(self, ledger: CostLedger | None = None):
        self.hypotheses: list = []
        self.ledger = ledger if ledger is not None else CostLedger()

    def register(self, h) -> int:
        self.hypotheses.append(h)
        return len(self.hypotheses) - 1

    def id_of(self, h) -> int:
        for k, g in enumerate(self.hypotheses):
            if g is h or g == h:
                return k
        raise ConfigurationError(f"hypothesis {getattr(h, 'identifier', h)!r} is not registered")


def evaluate_superposed(state: StateVector, table: HypothesisTable, points: np.ndarray,
                        h_reg: str = "hyp", x_reg: str = "index", b_reg: str = "label",
                        hypothesis=None) -> StateVector:
    """|h>|i>|b> -> |h>|i>|h(x_i) b>, labels encoded as qubit 0 <-> +1, 1 <-> -1.

    If ``hypothesis`` is given the |h> register is omitted from the layout and
    that single registered hypothesis is applied.
    """
    layout = state.layout
    if layout.width(b_reg) != 1:
        raise ConfigurationError("label register must be a single qubit")
    n_idx = layout.shape[layout.axis(x_reg)]
    pts = np.asarray(points, dtype=float)
    if hypothesis is not None:
        table.id_of(hypothesis)
        hyps = [hypothesis]
    else:
        hyps = table.hypotheses
        if len(hyps) > layout.shape[layout.axis(h_reg)]:
            raise ConfigurationError("hypothesis register too narrow")
    # flip[k, i] is True where hyps[k](x_i) = -1; padded rows/columns stay False
    n_rows = 1 if hypothesis is not None else layout.shape[layout.axis(h_reg)]
    flip = np.zeros((n_rows, n_idx), dtype=bool)
    for k, h in enumerate(hyps):
        flip[k, : len(pts)] = np.asarray(h.predict(pts)) < 0
    ivals = state.register_values(x_reg)
    hvals = 0 if hypothesis is not None else state.register_values(h_reg)
    mask = flip[hvals, ivals]
    b_ax = layout.axis(b_reg)
    state._require_value_constant(b_ax)
    state.amplitudes = np.where(mask, np.flip(state.amplitudes, axis=b_ax), state.amplitudes)
    table.ledger.charge(hypothesis_queries=1)
    return state
