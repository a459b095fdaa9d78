"""Synthetic PAC tasks, labeled samples, error measurement and sample-size planning."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from statistics import NormalDist
from typing import Callable, Sequence

import numpy as np

from .errors import ConfigurationError, DomainError
from .ledger import CostLedger

FAMILIES = ("majority", "threshold", "conjunction")

Predictor = Callable[[np.ndarray], int]


@dataclass(frozen=True)
class LabeledExample:
    point: tuple
    label: int

    def __post_init__(self):
        if self.label not in (-1, 1):
            raise DomainError(f"label must be -1 or +1, got {self.label}")


@dataclass(frozen=True)
class LabeledSample:
    """Ordered training sample; row ``i`` of ``points`` pairs with ``labels[i]``."""

    points: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        lab = np.asarray(self.labels, dtype=np.int64)
        if len(pts) < 1:
            raise DomainError("a sample needs at least one example")
        if len(pts) != len(lab):
            raise DomainError("points and labels differ in length")
        if not np.all(np.isin(lab, (-1, 1))):
            raise DomainError("labels must be -1 or +1")
        pts.setflags(write=False)
        lab.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "labels", lab)

    @property
    def m(self) -> int:
        return len(self.labels)

    @property
    def n(self) -> int:
        return self.points.shape[1]

    def __len__(self) -> int:
        return self.m

    def __getitem__(self, i: int) -> LabeledExample:
        return LabeledExample(tuple(self.points[i].tolist()), int(self.labels[i]))

    @property
    def examples(self) -> list[LabeledExample]:
        return [self[i] for i in range(self.m)]

    @classmethod
    def from_examples(cls, examples: Sequence[LabeledExample]) -> "LabeledSample":
        if not examples:
            raise DomainError("a sample needs at least one example")
        dims = {len(e.point) for e in examples}
        if len(dims) != 1:
            raise DomainError("all points must share one dimension")
        return cls(np.array([e.point for e in examples], dtype=float),
                   np.array([e.label for e in examples]))

    def subset(self, idx) -> "LabeledSample":
        idx = np.asarray(idx, dtype=np.int64)
        return LabeledSample(self.points[idx], self.labels[idx])


@dataclass(frozen=True)
class SyntheticTask:
    """A named target family with its parameters.

    ``majority``: sign(#ones among the first ``k`` coordinates - k/2) on
    uniform {0,1}^n, ties labeled +1.
    ``threshold``: +1 iff ``lower <= x < upper`` on uniform [0,1] (``upper``
    defaults to 1, giving a plain threshold).
    ``conjunction``: +1 iff the first ``k`` coordinates are all 1, points
    drawn with each coordinate 1 with probability ``p_one``.
    """

    family: str
    n: int = 1
    k: int = 1
    lower: float = 0.5
    upper: float = 1.0
    p_one: float = 0.5
    noise_rate: float = 0.0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ConfigurationError(f"unsupported task family {self.family!r}")
        if not 0.0 <= self.noise_rate < 1.0:
            raise DomainError("noise_rate must lie in [0, 1)")
        if self.family == "threshold" and self.n != 1:
            raise ConfigurationError("threshold tasks are one-dimensional")
        if self.family in ("majority", "conjunction") and not 1 <= self.k <= self.n:
            raise ConfigurationError("need 1 <= k <= n")

    def target(self, points: np.ndarray) -> np.ndarray:
        """Noiseless labels for a batch of points (shape (N, n))."""
        x = np.asarray(points, dtype=float)
        if x.ndim == 1:
            x = x[None, :]
        if self.family == "majority":
            ones = x[:, : self.k].sum(axis=1)
            return np.where(ones - self.k / 2 >= 0, 1, -1)
        if self.family == "threshold":
            v = x[:, 0]
            return np.where((v >= self.lower) & (v < self.upper), 1, -1)
        return np.where(np.all(x[:, : self.k] == 1, axis=1), 1, -1)

    def draw_points(self, count: int, rng: np.random.Generator) -> np.ndarray:
        if self.family == "majority":
            return rng.integers(0, 2, size=(count, self.n)).astype(float)
        if self.family == "threshold":
            return rng.random((count, 1))
        return (rng.random((count, self.n)) < self.p_one).astype(float)


def draw_sample(task: SyntheticTask, m: int, seed) -> LabeledSample:
    if m < 1:
        raise DomainError("m must be >= 1")
    rng = np.random.default_rng(seed)
    points = task.draw_points(m, rng)
    labels = task.target(points).astype(np.int64)
    n_flip = math.floor(task.noise_rate * m)
    if n_flip:
        flip = rng.choice(m, size=n_flip, replace=False)
        labels[flip] = -labels[flip]
    return LabeledSample(points, labels)


def _predict_all(h, points: np.ndarray) -> np.ndarray:
    if hasattr(h, "predict"):
        out = np.asarray(h.predict(points), dtype=np.int64).reshape(-1)
    else:
        out = np.array([np.asarray(h(p)).reshape(-1)[0] for p in points], dtype=np.int64)
    if len(out) != len(points):
        raise DomainError("predictor must return one label per point")
    return out


def empirical_error(h, S: LabeledSample) -> Fraction:
    """Exact fraction of the sample that ``h`` mislabels."""
    wrong = int(np.count_nonzero(_predict_all(h, S.points) != S.labels))
    return Fraction(wrong, S.m)


@dataclass(frozen=True)
class ErrorEstimate:
    error: float
    half_width: float
    n_test: int


def wald_half_width(p_hat: float, n: int, confidence: float = 0.95) -> float:
    z = NormalDist().inv_cdf(0.5 + confidence / 2)
    return z * math.sqrt(p_hat * (1 - p_hat) / n)


def generalization_error_estimate(h, task: SyntheticTask, n_test: int, seed) -> ErrorEstimate:
    """Monte-Carlo held-out error on fresh noiseless points, with a 95% Wald half-width."""
    if n_test < 1:
        raise DomainError("n_test must be >= 1")
    rng = np.random.default_rng(seed)
    points = task.draw_points(n_test, rng)
    wrong = int(np.count_nonzero(_predict_all(h, points) != task.target(points)))
    p_hat = wrong / n_test
    return ErrorEstimate(p_hat, wald_half_width(p_hat, n_test), n_test)


class OracleView:
    """Indexed lookups into a sample; every lookup is a charged sample query."""

    def __init__(self, S: LabeledSample, ledger: CostLedger | None = None):
        self.sample = S
        self.ledger = ledger if ledger is not None else CostLedger()

    def __len__(self):
        return self.sample.m

    def query(self, i: int) -> tuple[tuple, int]:
        if not 0 <= i < self.sample.m:
            raise DomainError(f"index {i} outside [0, {self.sample.m})")
        self.ledger.charge(sample_queries=1)
        return tuple(self.sample.points[i].tolist()), int(self.sample.labels[i])

    __getitem__ = query


def oracle_view(S: LabeledSample, ledger: CostLedger | None = None) -> OracleView:
    return OracleView(S, ledger)


# -- sample-size planning -------------------------------------------------

@dataclass(frozen=True)
class SampleSizePlan:
    d: int
    epsilon: float
    delta: float
    gamma: float
    c_D: float
    T_bound: int
    D_strong: int
    m_required: int


def _log_bound(m, D: int, eta: float) -> float:
    """Natural log of 8 (e m / D)^D exp(-m eta^2 / 32)."""
    return math.log(8) + D * (1 + np.log(m) - math.log(D)) - m * eta * eta / 32


def sample_size(d: int, epsilon: float, delta: float, gamma: float, c_D: float = 1.0) -> SampleSizePlan:
    """Smallest m for which the VC uniform-convergence bound at slack epsilon/2 is <= delta.

    The strong class is signs of sums of up to T_bound weak hypotheses, with
    T_bound the quantum iteration cap at kappa = epsilon/2.2. The search only
    considers m >= D_strong, where the growth-function bound is valid.
    """
    if d < 1:
        raise DomainError("d must be >= 1")
    for name, v, hi in (("epsilon", epsilon, 1), ("delta", delta, 1), ("gamma", gamma, 0.5)):
        if not 0 < v < hi:
            raise DomainError(f"{name} must lie in (0, {hi})")
    if c_D <= 0:
        raise DomainError("c_D must be positive")
    kappa = epsilon / 2.2
    T_bound = math.ceil(2.2 / (kappa * gamma**2 * math.sqrt(1 - gamma)))
    D = math.ceil(c_D * T_bound * d * math.log2(T_bound * d + 2))
    eta = epsilon / 2
    target = math.log(delta)
    # bound rises on [D, 32 D / eta^2] and falls afterwards
    lo = max(D, math.floor(32 * D / eta**2))
    hi = lo * 2
    while _log_bound(hi, D, eta) > target:
        lo, hi = hi, hi * 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if _log_bound(mid, D, eta) <= target:
            hi = mid
        else:
            lo = mid
    return SampleSizePlan(d, epsilon, delta, gamma, c_D, T_bound, D, hi)


# -- file format ----------------------------------------------------------

def _fmt(v: float) -> str:
    return str(int(v)) if float(v).is_integer() else repr(float(v))


def write_sample(S: LabeledSample, path) -> None:
    with open(Path(path), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([f"x_{j + 1}" for j in range(S.n)] + ["label"])
        for x, y in zip(S.points, S.labels):
            w.writerow([_fmt(v) for v in x] + [str(int(y))])


def read_sample(path) -> LabeledSample:
    with open(Path(path), newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    if not header or header[-1] != "label":
        raise ConfigurationError("last column must be 'label'")
    pts = [[float(v) for v in r[:-1]] for r in body]
    labels = [int(r[-1]) for r in body]
    return LabeledSample(np.array(pts, dtype=float).reshape(len(body), len(header) - 1),
                         np.array(labels))
