"""Distribution-state preparation and approximate counting on two backends.

``ExactBackend`` simulates the circuits on statevectors and charges the
ledger for every oracle application it actually performs. ``CostModelBackend``
computes the same results by classical arithmetic and charges the query
counts the complexity bounds promise, so large instances stay cheap.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import ConfigurationError, ContractError, DomainError, PreconditionError, StatisticalAnomalyError
from .amplify import C_A, AmplifiedUnitary
from .state import (
    DistributionLoader,
    Layout,
    StateVector,
    WeightOracle,
    decode_fixed,
    fix_global_phase,
    measure,
)

# cost-model charge for counting: ceil(C_C sqrt(N) ln(1/delta) / eps); chosen so the
# cost model tracks the exact backend's phase-estimation cost to within ~2x
C_C = 384.0
MAX_INDEX_QUBITS = 12
MAX_PREP_ATTEMPTS = 64


@dataclass
class PreparedState:
    """Index-register state sum_i sqrt(D_i)|i> plus bookkeeping from its preparation."""

    state: StateVector
    attempts: int
    success_probability: float | None
    rounds: int

    @property
    def amplitudes(self) -> np.ndarray:
        return self.state.amplitudes.reshape(-1)


@dataclass
class CountResult:
    estimate: float
    repetitions: int
    estimates: tuple[float, ...]
    queries: int
    phase_qubits: int | None = None


def phase_qubits(N: int, eps_rel: float) -> int:
    return math.ceil(math.log2(math.sqrt(N) / eps_rel)) + 3


def repetitions(delta: float) -> int:
    return max(1, math.ceil(8 * math.log(1 / delta)))


def _check_count_args(eps_rel: float, delta: float):
    if not 0 < eps_rel < 1:
        raise DomainError("eps_rel must lie in (0, 1)")
    if not 0 < delta < 1:
        raise DomainError("delta must lie in (0, 1)")


class GroverKernel:
    """Gate-level Grover iterate on raw (index, flag) amplitude arrays.

    Same circuit as ``DistributionLoader`` (uniform reflection, XOR oracle,
    value-controlled rotation, uncomputing oracle) without the generic
    register bookkeeping, for the long phase-estimation ladder. Every gate
    is real, so amplitudes are kept as float64. The value register holds a
    function of the index, so its XOR/decode/uncompute is carried out once
    here and each U or U^dagger is charged its two oracle queries.
    """

    def __init__(self, oracle: WeightOracle):
        self.oracle = oracle
        self.width = oracle.n_index
        table = oracle.table_for(self.width)
        value = np.zeros_like(table) ^ table
        M = decode_fixed(value)
        value ^= table
        if value.any():
            raise ContractError("value register not restored to zero")
        self.c, self.s = np.sqrt(M), np.sqrt(1.0 - M)
        dim = 1 << self.width
        u = np.zeros(dim)
        u[: oracle.N] = 1 / math.sqrt(oracle.N)
        w = -u
        w[0] += 1.0
        nw = np.linalg.norm(w)
        self.w = w / nw if nw > 1e-15 else None
        self.w2 = None if self.w is None else 2 * self.w

    def _reflect(self, a0, a1):
        if self.w is not None:
            a0 -= self.w2 * (self.w @ a0)
            a1 -= self.w2 * (self.w @ a1)

    def apply(self, a0, a1):
        self._reflect(a0, a1)
        c, s = self.c, self.s
        return c * a0 - s * a1, s * a0 + c * a1

    def adjoint(self, a0, a1):
        c, s = self.c, self.s
        a0, a1 = c * a0 + s * a1, c * a1 - s * a0
        self._reflect(a0, a1)
        return a0, a1

    def prepared(self) -> np.ndarray:
        a0 = np.zeros(1 << self.width)
        a0[0] = 1.0
        a0, a1 = self.apply(a0, np.zeros_like(a0))
        self.oracle.charge(2)
        return np.stack([a0, a1], axis=1)

    def iterate(self, a: np.ndarray) -> np.ndarray:
        """Q = -U S_0 U^dagger S_good on an (index, flag) array."""
        a0, a1 = self.adjoint(-a[:, 0], a[:, 1].copy())
        a0[0] = -a0[0]
        a0, a1 = self.apply(a0, a1)
        self.oracle.charge(4)
        return -np.stack([a0, a1], axis=1)

    def ladder(self, K: int) -> np.ndarray:
        """Rows Q^k U|0> for k < K."""
        psi = self.prepared()
        rows = np.empty((K,) + psi.shape)
        rows[0] = psi
        a0, a1 = psi[:, 0].copy(), psi[:, 1].copy()
        for k in range(1, K):
            a0, a1 = self.adjoint(-a0, a1)
            a0[0] = -a0[0]
            a0, a1 = self.apply(a0, a1)
            a0, a1 = -a0, -a1
            rows[k, :, 0] = a0
            rows[k, :, 1] = a1
        self.oracle.charge(4 * (K - 1))
        return rows


class ExactBackend:
    kind = "exact-statevector"

    def prepare_distribution_state(self, oracle: WeightOracle, m: int, kappa: float,
                                   rng: np.random.Generator, check: bool = True) -> PreparedState:
        """Amplify the flag-0 branch of the loader, measure the flag, repeat until it reads 0."""
        if not 0 < kappa < 1:
            raise DomainError("kappa must lie in (0, 1)")
        if oracle.n_index > MAX_INDEX_QUBITS:
            raise ConfigurationError(f"exact backend supports at most {MAX_INDEX_QUBITS} index qubits")
        loader = DistributionLoader(oracle, m)
        amp = AmplifiedUnitary(loader, kappa, ledger=oracle.ledger, check=check)
        for attempt in range(1, MAX_PREP_ATTEMPTS + 1):
            state = amp.apply()
            p_good = float(state.probabilities("flag")[0])
            outcome, collapsed = measure(state, "flag", rng, keep=False)
            if outcome == 0:
                collapsed.amplitudes = fix_global_phase(collapsed.amplitudes)
                return PreparedState(collapsed, attempt, p_good, amp.rounds)
        raise StatisticalAnomalyError(f"state preparation failed {MAX_PREP_ATTEMPTS} times")

    def approx_count(self, oracle: WeightOracle, eps_rel: float, delta: float,
                     rng: np.random.Generator, strict: bool = True) -> CountResult:
        """Relative-error estimate of sum(z) by phase estimation on the Grover iterate.

        The iterate Q = -U S_0 U^dagger S_good has eigenphases +-2 theta with
        sin^2 theta = s/N. The controlled-Q^(2^j) ladder leaves the phase
        register in sum_k |k> Q^k U|0>; that state is built with K-1 real
        applications of Q, the same count the ladder uses, then an inverse
        QFT and a measurement give theta. The circuit is deterministic up to
        the final measurement, so all median repetitions sample from one
        simulated pre-measurement state; the ledger is charged for each.
        """
        _check_count_args(eps_rel, delta)
        N = oracle.N
        if oracle.n_index > MAX_INDEX_QUBITS:
            raise ConfigurationError(f"exact backend supports at most {MAX_INDEX_QUBITS} index qubits")
        before = oracle.ledger.oracle_queries
        kernel = GroverKernel(oracle)
        t = phase_qubits(N, eps_rel)
        K = 1 << t
        rows = kernel.ladder(K)
        if strict and N * float(np.sum(rows[0, :, 0] ** 2)) < 1 - 1e-9:
            raise PreconditionError("approximate counting needs sum(z) >= 1")
        # real rows: outcomes j and K-j carry equal mass and give the same estimate
        spec = np.fft.rfft(rows, axis=0, norm="ortho")
        probs = np.sum(np.abs(spec) ** 2, axis=(1, 2)) / K
        probs[1: K // 2] *= 2
        probs = probs / probs.sum()
        R = repetitions(delta)
        outcomes = rng.choice(len(probs), size=R, p=probs)
        ests = tuple(float(N * math.sin(math.pi * j / K) ** 2) for j in outcomes)
        per_run = oracle.ledger.oracle_queries - before
        # the remaining R-1 runs replay the same circuit
        oracle.charge(per_run * (R - 1))
        return CountResult(float(np.median(ests)), R, ests, per_run * R, t)


class CostModelBackend:
    kind = "cost-model"

    def prepare_distribution_state(self, oracle: WeightOracle, m: int, kappa: float,
                                   rng: np.random.Generator, check: bool = True) -> PreparedState:
        if not 0 < kappa < 1:
            raise DomainError("kappa must lie in (0, 1)")
        M = oracle.values[:m]
        s = math.fsum(M)
        if check and s < kappa * m * (1 - 1e-9):
            raise PreconditionError("sum of weights below kappa*m")
        rounds = prep_rounds(kappa)
        oracle.charge(2 * rounds + 2)
        oracle.ledger.charge(amplification_rounds=rounds)
        width = oracle.n_index
        amps = np.zeros(1 << width, dtype=complex)
        amps[:m] = np.sqrt(M / s)
        return PreparedState(StateVector(Layout((("index", width),)), amps), 1, None, rounds)

    def approx_count(self, oracle: WeightOracle, eps_rel: float, delta: float,
                     rng: np.random.Generator, strict: bool = True) -> CountResult:
        """Exact sum, perturbed inside the band; with probability delta/2 pushed outside it."""
        _check_count_args(eps_rel, delta)
        s = math.fsum(oracle.values)
        if strict and s < 1 - 1e-9:
            raise PreconditionError("approximate counting needs sum(z) >= 1")
        q = count_charge(oracle.N, eps_rel, delta)
        oracle.charge(q)
        if rng.random() < delta / 2:
            est = s * (1 + rng.choice((-1.0, 1.0)) * 1.5 * eps_rel)
        else:
            est = s * (1 + rng.uniform(-eps_rel / 2, eps_rel / 2))
        return CountResult(float(est), 1, (float(est),), q)


def prep_rounds(kappa: float) -> int:
    return math.ceil(C_A / math.sqrt(kappa))


def count_charge(N: int, eps_rel: float, delta: float) -> int:
    return math.ceil(C_C * math.sqrt(N) * math.log(1 / delta) / eps_rel)


BACKENDS = {"exact": ExactBackend, "exact-statevector": ExactBackend,
            "cost-model": CostModelBackend, "cost": CostModelBackend}


def get_backend(kind) -> ExactBackend | CostModelBackend:
    if isinstance(kind, (ExactBackend, CostModelBackend)):
        return kind
    try:
        return BACKENDS[kind]()
    except KeyError:
        raise ConfigurationError(f"unknown backend {kind!r}") from None


def prepare_distribution_state(oracle: WeightOracle, m: int, kappa: float, rng,
                               backend="exact") -> PreparedState:
    return get_backend(backend).prepare_distribution_state(oracle, m, kappa, rng)


def approx_count(oracle: WeightOracle, eps_rel: float, delta: float, rng,
                 backend="exact", strict: bool = True) -> CountResult:
    return get_backend(backend).approx_count(oracle, eps_rel, delta, rng, strict=strict)
