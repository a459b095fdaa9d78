"""Quantum SmoothBoost: on-demand weights, estimated sums, prepared quantum examples."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .boost_classical import default_theta, iteration_bound, weights_from_margins, _validate
from .dataset import LabeledExample, LabeledSample
from .errors import DomainError, StatisticalAnomalyError
from .ledger import CostLedger
from .qsim.backend import CostModelBackend, get_backend, prep_rounds
from .qsim.state import WeightOracle
from .report import Ensemble, IterationRecord, RunReport
from .weak_learn import weighted_error

# largest round value with (1 - eps) >= 1/1.1 and (1 + eps) <= 1.1
EPS_REL = 0.09
SUM_SLACK = 1.1


class OnDemandWeights:
    """Recomputes N^t_i and M^t_i from the stored hypotheses instead of keeping vectors.

    ``N^t_i`` is summed over tau < t in hypothesis order, with the same
    floating-point steps as the explicit updater, so both agree bit for bit.
    """

    def __init__(self, S: LabeledSample, theta: float, gamma: float,
                 ledger: CostLedger | None = None, memoize: bool = False):
        self.S = S
        self.theta = theta
        self.gamma = gamma
        self.ledger = ledger if ledger is not None else CostLedger()
        self.memoize = memoize
        self.hypotheses: list = []
        # simulator-side cache of h_tau(x_i) y_i; the ledger is charged per use
        self._hy: list[np.ndarray] = []

    def add(self, h) -> None:
        self.hypotheses.append(h)
        self._hy.append(np.asarray(h.predict(self.S.points), dtype=np.int64) * self.S.labels)

    @property
    def t(self) -> int:
        return len(self.hypotheses) + 1

    def evaluate(self, i: int, t: int | None = None) -> tuple[float, float]:
        t = self.t if t is None else t
        if not 0 <= i < self.S.m:
            raise DomainError(f"index {i} outside [0, {self.S.m})")
        if t - 1 > len(self.hypotheses):
            raise DomainError(f"only {len(self.hypotheses)} hypotheses stored")
        N = 0.0
        for tau in range(t - 1):
            N = N + (float(self._hy[tau][i]) - self.theta)
        self.ledger.charge(hypothesis_queries=t - 1, sample_queries=1)
        return N, float(weights_from_margins(np.array([N]), self.gamma)[0])

    def margins(self, t: int | None = None) -> np.ndarray:
        """All N^t_i at once, uncharged (harness diagnostics and oracle tables)."""
        t = self.t if t is None else t
        N = np.zeros(self.S.m)
        for tau in range(t - 1):
            N = N + (self._hy[tau] - self.theta)
        return N

    def weights(self, t: int | None = None) -> np.ndarray:
        return weights_from_margins(self.margins(t), self.gamma)

    def oracle(self, t: int | None = None) -> WeightOracle:
        """Weight oracle for iteration t; each query pays t-1 hypothesis and 1 sample query."""
        t = self.t if t is None else t
        M = self.weights(t)
        if self.memoize:
            self.ledger.charge(hypothesis_queries=self.S.m * (t - 1), sample_queries=self.S.m)
            return WeightOracle(M, self.ledger, per_query={"memoized_lookups": 1})
        return WeightOracle(M, self.ledger, per_query={"hypothesis_queries": t - 1, "sample_queries": 1})


def on_demand_weight(i: int, t: int, ctx: OnDemandWeights) -> tuple[float, float]:
    return ctx.evaluate(i, t)


@dataclass(frozen=True)
class ErrorBudget:
    delta: float
    T_cap: int
    W: int

    @classmethod
    def plan(cls, delta: float, kappa: float, gamma: float, W: int) -> "ErrorBudget":
        return cls(delta, math.ceil(iteration_bound(kappa, gamma, SUM_SLACK)), W)

    @property
    def delta_sub(self) -> float:
        return self.delta / (4 * self.T_cap * (self.W + 2))

    def allocated(self, iterations: int | None = None) -> float:
        """Union bound over ``iterations`` rounds of one count and W + 1 other subroutine slots."""
        n = self.T_cap if iterations is None else iterations
        return n * (self.W + 2) * self.delta_sub


def estimate_sum(ctx: OnDemandWeights, backend, delta_sub: float, rng,
                 eps_rel: float = EPS_REL) -> float:
    backend = get_backend(backend)
    return backend.approx_count(ctx.oracle(), eps_rel, delta_sub, rng, strict=False).estimate


@dataclass
class QuantumExample:
    """sum_i sqrt(D_i)|x_i, y_i>: index amplitudes plus the sample that labels them."""

    amplitudes: np.ndarray
    sample: LabeledSample

    @property
    def probabilities(self) -> np.ndarray:
        p = np.abs(self.amplitudes[: self.sample.m]) ** 2
        return p / p.sum()

    def measure(self, rng: np.random.Generator) -> LabeledExample:
        i = int(rng.choice(self.sample.m, p=self.probabilities))
        return self.sample[i]


def prepare_quantum_examples(ctx: OnDemandWeights, W: int, backend, rng, kappa_lower: float,
                             check: bool = False) -> list[QuantumExample]:
    backend = get_backend(backend)
    oracle = ctx.oracle()
    out = []
    for _ in range(W):
        prep = backend.prepare_distribution_state(oracle, ctx.S.m, kappa_lower, rng, check=check)
        # sample query |i>|0> -> |i>|x_i, y_i>
        ctx.ledger.charge(sample_queries=1)
        out.append(QuantumExample(prep.amplitudes, ctx.S))
    return out


def _measured_batch(ctx, W, backend, rng, kappa_lower):
    """Cost-model shortcut: sample W indices from D^t directly, charging full preparation cost."""
    oracle = ctx.oracle()
    M = oracle.values[: ctx.S.m]
    rounds = prep_rounds(kappa_lower)
    oracle.charge(W * (2 * rounds + 2))
    ctx.ledger.charge(amplification_rounds=W * rounds, sample_queries=W)
    idx = rng.choice(ctx.S.m, size=W, p=M / M.sum())
    return [ctx.S[i] for i in idx]


def _exact_sum(ctx):
    return math.fsum(ctx.weights())


def qsmoothboost_run(learner, S: LabeledSample, kappa: float, gamma: float, W: int,
                     theta: float | None = None, backend="exact", delta: float = 1 / 3,
                     seed=0, feed: str = "quantum", force_exact_sum: bool = False,
                     cap: int | None = None, eps_rel: float = EPS_REL, memoize: bool = False,
                     shortcut: bool = False, ledger: CostLedger | None = None
                     ) -> tuple[Ensemble, RunReport]:
    """Quantum SmoothBoost on a chosen backend.

    ``feed='quantum'`` prepares W quantum examples per round and hands them to
    the learner (``fit_quantum`` if it has one, else measured examples to
    ``fit``). ``feed='weighted'`` gives the learner the exact distribution.
    ``force_exact_sum`` replaces the estimated sum by the true one.
    ``shortcut`` (cost-model only) samples measured examples without building
    states while still charging preparation cost.

    True sums, exact weighted errors and ensemble errors are recomputed each
    round for the report; these diagnostics never touch the ledger.
    """
    theta = default_theta(gamma) if theta is None else theta
    _validate(S, kappa, theta, gamma, W)
    if feed not in ("quantum", "weighted"):
        raise DomainError("feed must be 'quantum' or 'weighted'")
    if not 0 < delta < 1:
        raise DomainError("delta must lie in (0, 1)")
    if (1 + eps_rel) > SUM_SLACK or 1 / (1 - eps_rel) > SUM_SLACK:
        raise DomainError("eps_rel too large for the 1.1 band")
    be = get_backend(backend)
    if shortcut and not isinstance(be, CostModelBackend):
        raise DomainError("shortcut is only available on the cost-model backend")
    cap = math.ceil(2.2 * math.ceil(iteration_bound(kappa, gamma))) if cap is None else cap
    budget = ErrorBudget.plan(delta, kappa, gamma, W)
    ledger = ledger if ledger is not None else CostLedger()
    ctx = OnDemandWeights(S, theta, gamma, ledger, memoize)
    rng = np.random.default_rng(seed)
    m = S.m
    ens = Ensemble()
    votes = np.zeros(m, dtype=np.int64)
    report = RunReport("qsmoothboost", dict(kappa=kappa, theta=theta, gamma=gamma, W=W, cap=cap,
                                            seed=seed, feed=feed, delta=delta,
                                            force_exact_sum=force_exact_sum, memoize=memoize,
                                            shortcut=shortcut), m,
                       backend=be.kind, epsilon_rel=eps_rel, delta_sub=budget.delta_sub)
    kappa_lower = kappa / SUM_SLACK
    while True:
        s_true = _exact_sum(ctx)
        if force_exact_sum:
            est = s_true
        else:
            est = be.approx_count(ctx.oracle(), eps_rel, budget.delta_sub, rng, strict=False).estimate
        est_ok = s_true / SUM_SLACK <= est <= SUM_SLACK * s_true
        if not est_ok:
            report.subroutine_failures.append({"t": ens.T + 1, "kind": "estimate", "true_sum": s_true,
                                               "estimate": est})
        if est < kappa * m:
            report.status = "terminated"
            report.final_sum, report.final_estimate = s_true, est
            break
        if ens.T >= cap:
            report.status = "cap_reached"
            report.final_sum, report.final_estimate = s_true, est
            break
        D = ctx.weights() / s_true
        if feed == "weighted":
            h = learner.fit_weighted(S, D)
        elif shortcut:
            h = learner.fit(_measured_batch(ctx, W, be, rng, kappa_lower))
        else:
            if s_true < kappa_lower * m:
                report.subroutine_failures.append({"t": ens.T + 1, "kind": "prep-precondition",
                                                   "true_sum": s_true})
            try:
                qex = prepare_quantum_examples(ctx, W, be, rng, kappa_lower)
            except StatisticalAnomalyError as exc:
                report.status = "abnormal"
                report.notes.append(str(exc))
                break
            if hasattr(learner, "fit_quantum"):
                h = learner.fit_quantum(qex, rng)
            else:
                h = learner.fit([q.measure(rng) for q in qex])
        ledger.charge(weak_learner_calls=1)
        werr = weighted_error(h, S, D)
        ens.add(h)
        ctx.add(h)
        votes += np.asarray(h.predict(S.points), dtype=np.int64)
        wrong = int(np.count_nonzero(np.where(votes >= 0, 1, -1) != S.labels))
        report.iterations.append(IterationRecord(
            t=ens.T, sum_M=s_true, max_D=float(np.max(D)), weak_error=werr,
            weak_ok=werr <= 0.5 - gamma, ensemble_wrong=wrong, m=m,
            sum_M_next=_exact_sum(ctx), estimate=est, estimate_ok=est_ok))
    report.T = ens.T
    report.final_wrong = int(np.count_nonzero(ens.predict(S.points) != S.labels))
    report.ledger = ledger.snapshot()
    return ens, report
