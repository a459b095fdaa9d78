"""Classical SmoothBoost with explicit weight vectors, and an AdaBoost baseline."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dataset import LabeledExample, LabeledSample
from .errors import DegenerateLearnerError, DomainError, StatisticalAnomalyError
from .ledger import CostLedger
from .report import Ensemble, IterationRecord, RunReport
from .weak_learn import weighted_error

TINY = np.finfo(float).tiny
_BELOW_ONE = np.nextafter(1.0, 0.0)
FEEDS = ("resample", "weighted")


def default_theta(gamma: float) -> float:
    if not 0 < gamma <= 0.5:
        raise DomainError("gamma must lie in (0, 1/2]")
    return gamma / (2 + gamma)


def iteration_bound(kappa: float, gamma: float, slack: float = 1.0) -> float:
    """slack * 2 / (kappa gamma^2 sqrt(1-gamma)); slack 1.1 for estimated sums."""
    return slack * 2 / (kappa * gamma**2 * math.sqrt(1 - gamma))


def weights_from_margins(N: np.ndarray, gamma: float) -> np.ndarray:
    """M_i = 1 for N_i < 0, else (1-gamma)^(N_i/2), floored at the smallest normal float."""
    N = np.asarray(N, dtype=float)
    M = np.exp((N / 2) * math.log(1 - gamma))
    # tiny positive N must still give M < 1
    M = np.clip(M, TINY, _BELOW_ONE)
    return np.where(N <= 0, 1.0, M)


@dataclass(frozen=True)
class WeightState:
    N: np.ndarray
    M: np.ndarray
    t: int

    @classmethod
    def initial(cls, m: int) -> "WeightState":
        return cls(np.zeros(m), np.ones(m), 1)

    def consistent(self) -> bool:
        return bool(np.all((self.M == 1) == (self.N <= 0)) and np.all((self.M > 0) & (self.M <= 1)))


def update_weights(state: WeightState, h, S: LabeledSample, theta: float, gamma: float,
                   ledger: CostLedger | None = None) -> WeightState:
    hy = np.asarray(h.predict(S.points), dtype=np.int64) * S.labels
    N = state.N + (hy - theta)
    if ledger is not None:
        ledger.charge(hypothesis_queries=S.m, sample_queries=S.m)
    return WeightState(N, weights_from_margins(N, gamma), state.t + 1)


def rejection_sample(M: np.ndarray, S: LabeledSample, rng: np.random.Generator,
                     kappa: float | None = None, ledger: CostLedger | None = None
                     ) -> tuple[LabeledExample, int, int]:
    """Uniform proposal, accept index i with probability M_i.

    Returns (example, index, attempts). Raises after ceil(64/kappa) attempts,
    where kappa defaults to the acceptance rate sum(M)/m. M is stored
    explicitly (already paid for when the round's sum was computed), so
    attempts are memory reads; only the accepted example is a charged query.
    """
    m = len(M)
    if kappa is None:
        kappa = math.fsum(M) / m
    limit = math.ceil(64 / kappa)
    for attempt in range(1, limit + 1):
        i = int(rng.integers(m))
        if rng.random() < M[i]:
            if ledger is not None:
                ledger.charge(sample_queries=1)
            return S[i], i, attempt
    raise StatisticalAnomalyError(f"no acceptance in {limit} rejection-sampling attempts")


def _fit(learner, feed, S, D, M, W, rng, kappa, ledger):
    if feed == "weighted":
        h = learner.fit_weighted(S, D)
    else:
        batch = [rejection_sample(M, S, rng, kappa, ledger)[0] for _ in range(W)]
        h = learner.fit(batch)
    ledger.charge(weak_learner_calls=1)
    return h


def _validate(S, kappa, theta, gamma, W):
    if not 0 < kappa < 1:
        raise DomainError("kappa must lie in (0, 1)")
    if kappa * S.m < 1:
        raise DomainError("need kappa * m >= 1")
    if not 0 <= theta < 0.5:
        raise DomainError("theta must lie in [0, 1/2)")
    if not 0 < gamma <= 0.5:
        raise DomainError("gamma must lie in (0, 1/2]")
    if W < 1:
        raise DomainError("W must be >= 1")


def smoothboost_run(learner, S: LabeledSample, kappa: float, gamma: float, W: int,
                    theta: float | None = None, cap: int | None = None, seed=0,
                    feed: str = "resample", ledger: CostLedger | None = None,
                    on_iteration=None) -> tuple[Ensemble, RunReport]:
    """Run SmoothBoost to termination (sum of weights below kappa*m) or to ``cap``.

    ``feed='resample'`` hands the learner W rejection-sampled examples;
    ``feed='weighted'`` hands it the exact distribution instead.
    """
    theta = default_theta(gamma) if theta is None else theta
    _validate(S, kappa, theta, gamma, W)
    if feed not in FEEDS:
        raise DomainError(f"feed must be one of {FEEDS}")
    need = math.ceil(iteration_bound(kappa, gamma))
    cap = need if cap is None else cap
    if cap < need:
        raise DomainError(f"cap must be >= {need}")
    ledger = ledger if ledger is not None else CostLedger()
    rng = np.random.default_rng(seed)
    m = S.m
    state = WeightState.initial(m)
    ens = Ensemble()
    votes = np.zeros(m, dtype=np.int64)
    report = RunReport("smoothboost", dict(kappa=kappa, theta=theta, gamma=gamma, W=W, cap=cap,
                                           seed=seed, feed=feed), m)
    while True:
        s = math.fsum(state.M)
        ledger.charge(oracle_queries=m)
        if s < kappa * m:
            report.status = "terminated"
            report.final_sum = s
            break
        if ens.T >= cap:
            report.status = "cap_reached"
            report.final_sum = s
            break
        D = state.M / s
        h = _fit(learner, feed, S, D, state.M, W, rng, kappa, ledger)
        werr = weighted_error(h, S, D)
        ens.add(h)
        votes += np.asarray(h.predict(S.points), dtype=np.int64)
        state = update_weights(state, h, S, theta, gamma, ledger)
        wrong = int(np.count_nonzero(np.where(votes >= 0, 1, -1) != S.labels))
        rec = IterationRecord(t=ens.T, sum_M=s, max_D=float(np.max(D)), weak_error=werr,
                              weak_ok=werr <= 0.5 - gamma, ensemble_wrong=wrong, m=m,
                              sum_M_next=math.fsum(state.M))
        report.iterations.append(rec)
        if on_iteration is not None:
            on_iteration(rec, state)
    report.T = ens.T
    report.final_wrong = int(np.count_nonzero(ens.predict(S.points) != S.labels))
    report.ledger = ledger.snapshot()
    return ens, report


ALPHA_CAP = 0.5 * math.log((1 - 1e-12) / 1e-12)


def adaboost_alpha(eps: float) -> float:
    if eps <= 0:
        return ALPHA_CAP
    return min(0.5 * math.log((1 - eps) / eps), ALPHA_CAP)


def adaboost_run(learner, S: LabeledSample, rounds: int, W: int | None = None, seed=0,
                 feed: str = "weighted", ledger: CostLedger | None = None
                 ) -> tuple[Ensemble, RunReport]:
    """AdaBoost from the uniform distribution; stops once training error reaches 0."""
    if rounds < 1:
        raise DomainError("rounds must be >= 1")
    if feed not in FEEDS:
        raise DomainError(f"feed must be one of {FEEDS}")
    if feed == "resample" and not W:
        raise DomainError("resampled AdaBoost needs W")
    ledger = ledger if ledger is not None else CostLedger()
    rng = np.random.default_rng(seed)
    m = S.m
    D = np.full(m, 1.0 / m)
    ens = Ensemble()
    report = RunReport("adaboost", dict(rounds=rounds, W=W, seed=seed, feed=feed), m)
    report.status = "terminated"
    for _ in range(rounds):
        if feed == "weighted":
            h = learner.fit_weighted(S, D)
        else:
            idx = rng.choice(m, size=W, p=D)
            ledger.charge(sample_queries=W)
            h = learner.fit([S[i] for i in idx])
        ledger.charge(weak_learner_calls=1, hypothesis_queries=m, sample_queries=m)
        pred = np.asarray(h.predict(S.points), dtype=np.int64)
        eps = math.fsum(D[pred != S.labels])
        if eps >= 0.5:
            raise DegenerateLearnerError(f"weighted error {eps:.6g} >= 1/2")
        alpha = adaboost_alpha(eps)
        ens.add(h, alpha)
        report.alphas.append(alpha)
        D = D * np.exp(-alpha * S.labels * pred)
        D = D / math.fsum(D)
        wrong = int(np.count_nonzero(ens.predict(S.points) != S.labels))
        report.iterations.append(IterationRecord(
            t=ens.T, sum_M=1.0, max_D=float(np.max(D)), weak_error=eps, weak_ok=True,
            ensemble_wrong=wrong, m=m, sum_M_next=1.0))
        if eps == 0 or wrong == 0:
            break
    report.T = ens.T
    report.final_wrong = report.iterations[-1].ensemble_wrong
    report.ledger = ledger.snapshot()
    return ens, report
