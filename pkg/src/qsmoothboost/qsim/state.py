"""Statevector representation, oracles, and measurement.

Amplitudes are stored densely over the *small* registers of a layout (index,
flag, phase, label ...). The first declared register is the most significant,
so ``amplitudes.reshape(shape)`` has one axis per register in declaration
order and basis index ``sum_k r_k * prod_{j>k} 2**w_j``.

A fixed-point value register of ``VALUE_BITS`` qubits rides along as an
integer array ``value`` with the same shape as the amplitude tensor: entry
``value[b]`` is the register's content on small-register basis state ``b``.
This is exact whenever the value register holds a function of the small
registers, which is the case for every circuit built here (oracles write
z_i into it keyed on the index register, and uncompute it before anything
mixes index states). Gates that would mix branches with different value
contents raise instead of silently producing a wrong state.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from ..errors import ConfigurationError, ContractError, DomainError
from ..ledger import CostLedger

VALUE_BITS = 32
_SCALE = (1 << VALUE_BITS) - 1
NORM_TOL = 1e-10


def encode_fixed(z) -> np.ndarray:
    """Round values in [0, 1] to VALUE_BITS-bit codes; 0 and 1 are exact."""
    z = np.asarray(z, dtype=float)
    if not np.all((z >= 0) & (z <= 1)):
        raise DomainError("oracle values must lie in [0, 1]")
    return np.rint(z * _SCALE).astype(np.uint64)


def decode_fixed(code) -> np.ndarray:
    return np.asarray(code, dtype=np.uint64).astype(float) / _SCALE


def index_qubits(m: int) -> int:
    return max(1, math.ceil(math.log2(m)))


@dataclass(frozen=True)
class Layout:
    registers: tuple[tuple[str, int], ...]

    def __post_init__(self):
        names = [n for n, _ in self.registers]
        if len(set(names)) != len(names):
            raise ConfigurationError("duplicate register names")

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(1 << w for _, w in self.registers)

    @property
    def dim(self) -> int:
        return int(np.prod(self.shape))

    def axis(self, name: str) -> int:
        for k, (n, _) in enumerate(self.registers):
            if n == name:
                return k
        raise ConfigurationError(f"no register named {name!r}")

    def width(self, name: str) -> int:
        return self.registers[self.axis(name)][1]

    def without(self, name: str) -> "Layout":
        return Layout(tuple(r for r in self.registers if r[0] != name))


@dataclass
class StateVector:
    layout: Layout
    amplitudes: np.ndarray
    value: np.ndarray = None

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex).reshape(self.layout.shape)
        if self.value is None:
            self.value = np.zeros(self.layout.shape, dtype=np.uint64)
        else:
            self.value = np.broadcast_to(np.asarray(self.value, dtype=np.uint64),
                                         self.layout.shape).copy()

    @classmethod
    def zeros(cls, layout: Layout) -> "StateVector":
        amps = np.zeros(layout.shape, dtype=complex)
        amps[(0,) * len(layout.shape)] = 1.0
        return cls(layout, amps)

    @classmethod
    def basis(cls, layout: Layout, **values: int) -> "StateVector":
        amps = np.zeros(layout.shape, dtype=complex)
        idx = tuple(values.get(name, 0) for name, _ in layout.registers)
        amps[idx] = 1.0
        return cls(layout, amps)

    def copy(self) -> "StateVector":
        return StateVector(self.layout, self.amplitudes.copy(), self.value.copy())

    @property
    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.amplitudes) ** 2)))

    def check_norm(self, tol: float = NORM_TOL) -> None:
        if abs(self.norm - 1.0) > tol:
            raise ContractError(f"state norm drifted to {self.norm!r}")

    def probabilities(self, register: str) -> np.ndarray:
        ax = self.layout.axis(register)
        other = tuple(k for k in range(len(self.layout.shape)) if k != ax)
        return np.sum(np.abs(self.amplitudes) ** 2, axis=other)

    def ancilla_clear(self) -> bool:
        return not np.any(self.value)

    def _require_value_constant(self, axis: int) -> None:
        if not np.all(self.value == np.take(self.value, [0], axis=axis)):
            raise ContractError("gate would mix branches holding different value-register contents")

    def apply_on(self, register: str, op: Callable[[np.ndarray, int], np.ndarray]) -> "StateVector":
        """Apply a linear map along one register axis; ``op(amps, axis)`` returns new amps."""
        ax = self.layout.axis(register)
        self._require_value_constant(ax)
        self.amplitudes = op(self.amplitudes, ax)
        return self

    def apply_matrix(self, register: str, matrix: np.ndarray) -> "StateVector":
        matrix = np.asarray(matrix, dtype=complex)

        def op(a, ax):
            return np.moveaxis(np.tensordot(matrix, a, axes=([1], [ax])), 0, ax)

        return self.apply_on(register, op)

    def phase_where(self, mask: np.ndarray, phase: complex) -> "StateVector":
        self.amplitudes = np.where(mask, self.amplitudes * phase, self.amplitudes)
        return self

    def register_values(self, register: str) -> np.ndarray:
        """Broadcastable array holding each basis state's value of ``register``."""
        ax = self.layout.axis(register)
        shape = [1] * len(self.layout.shape)
        shape[ax] = self.layout.shape[ax]
        return np.arange(self.layout.shape[ax]).reshape(shape)


def measure(state: StateVector, register: str, rng: np.random.Generator,
            keep: bool = True) -> tuple[int, StateVector]:
    """Projective computational-basis measurement of one register.

    Returns the outcome and the collapsed, renormalized state. With
    ``keep=False`` the measured register is dropped from the layout.
    """
    probs = state.probabilities(register)
    probs = probs / probs.sum()
    outcome = int(rng.choice(len(probs), p=probs))
    ax = state.layout.axis(register)
    sl = np.take(state.amplitudes, [outcome], axis=ax)
    val = np.take(state.value, [outcome], axis=ax)
    sl = sl / math.sqrt(np.sum(np.abs(sl) ** 2))
    if keep:
        amps = np.zeros_like(state.amplitudes)
        idx = [slice(None)] * amps.ndim
        idx[ax] = slice(outcome, outcome + 1)
        amps[tuple(idx)] = sl
        vals = np.zeros_like(state.value)
        vals[tuple(idx)] = val
        return outcome, StateVector(state.layout, amps, vals)
    return outcome, StateVector(state.layout.without(register),
                                np.squeeze(sl, axis=ax), np.squeeze(val, axis=ax))


class WeightOracle:
    """Query access to z in [0,1]^N, encoded to VALUE_BITS-bit fixed point.

    Each application XORs the code of z_i into the value register on every
    index branch i and charges the ledger one oracle query. ``per_query``
    lists extra ledger charges per query, e.g. the hypothesis and sample
    queries needed to compute a weight on demand.
    """

    def __init__(self, z, ledger: CostLedger | None = None, per_query: dict | None = None):
        self.codes = encode_fixed(z)
        self.N = len(self.codes)
        if self.N < 1:
            raise DomainError("oracle needs at least one value")
        self.ledger = ledger if ledger is not None else CostLedger()
        self.per_query = dict(per_query or {})
        self.n_index = index_qubits(self.N)
        padded = np.zeros(1 << self.n_index, dtype=np.uint64)
        padded[: self.N] = self.codes
        self._table = padded

    @property
    def values(self) -> np.ndarray:
        """Decoded values; what every backend treats as the true z."""
        return decode_fixed(self.codes)

    def lookup(self, i: int) -> float:
        if not 0 <= i < self.N:
            raise DomainError(f"index {i} outside [0, {self.N})")
        self.charge(1)
        return float(decode_fixed(self.codes[i]))

    def charge(self, n: int) -> None:
        if n <= 0:
            return
        extra = {k: v * n for k, v in self.per_query.items()}
        self.ledger.charge(oracle_queries=n, **extra)

    def table_for(self, index_width: int) -> np.ndarray:
        if index_width < self.n_index:
            raise ConfigurationError("index register too narrow for this oracle")
        table = np.zeros(1 << index_width, dtype=np.uint64)
        table[: self.N] = self.codes
        return table


def apply_oracle(state: StateVector, oracle: WeightOracle, index: str = "index") -> StateVector:
    """O_z |i, b> = |i, b XOR code(z_i)> on every branch; one charged query."""
    table = oracle.table_for(state.layout.width(index))
    state.value = state.value ^ table[state.register_values(index)]
    oracle.charge(1)
    return state


def apply_value_rotation(state: StateVector, flag: str = "flag", inverse: bool = False) -> StateVector:
    """Rotate the flag qubit by arcsin(sqrt(M)) where M is the decoded value register.

    |v>|0> -> |v>(sqrt(M)|0> + sqrt(1-M)|1>) and |v>|1> -> |v>(-sqrt(1-M)|0> + sqrt(M)|1>).
    """
    ax = state.layout.axis(flag)
    state._require_value_constant(ax)
    M = decode_fixed(np.take(state.value, [0], axis=ax))
    c, s = np.sqrt(M), np.sqrt(1.0 - M)
    a0 = np.take(state.amplitudes, [0], axis=ax)
    a1 = np.take(state.amplitudes, [1], axis=ax)
    if inverse:
        n0, n1 = c * a0 + s * a1, -s * a0 + c * a1
    else:
        n0, n1 = c * a0 - s * a1, s * a0 + c * a1
    state.amplitudes = np.concatenate([n0, n1], axis=ax)
    return state


def householder_uniform(m: int, width: int) -> Callable[[np.ndarray, int], np.ndarray]:
    """Self-inverse real reflection sending |0> to the uniform state over the first m indices."""
    dim = 1 << width
    u = np.zeros(dim)
    u[:m] = 1 / math.sqrt(m)
    w = -u
    w[0] += 1.0
    nw = np.linalg.norm(w)
    if nw < 1e-15:
        return lambda a, ax: a
    w /= nw

    def op(a, ax):
        moved = np.moveaxis(a, ax, -1)
        proj = moved @ w
        return np.moveaxis(moved - 2 * proj[..., None] * w, -1, ax)

    return op


class DistributionLoader:
    """U: |0>|0> -> (1/sqrt m) sum_i |i>(sqrt(M_i)|0> + sqrt(1-M_i)|1>).

    Built from a uniform-superposition reflection, a weight-oracle query, a
    value-controlled flag rotation, and a second query that uncomputes the
    value register. Each application costs two oracle queries.
    """

    def __init__(self, oracle: WeightOracle, m: int | None = None):
        self.oracle = oracle
        self.m = oracle.N if m is None else m
        self.width = oracle.n_index
        self.layout = Layout((("index", self.width), ("flag", 1)))
        self._uniform = householder_uniform(self.m, self.width)
        self.applications = 0

    def _check_clear(self, state):
        if not state.ancilla_clear():
            raise ContractError("value register not restored to zero")

    def apply(self, state: StateVector) -> StateVector:
        self._check_clear(state)
        state.apply_on("index", self._uniform)
        apply_oracle(state, self.oracle)
        apply_value_rotation(state)
        apply_oracle(state, self.oracle)
        self._check_clear(state)
        self.applications += 1
        return state

    def adjoint(self, state: StateVector) -> StateVector:
        self._check_clear(state)
        apply_oracle(state, self.oracle)
        apply_value_rotation(state, inverse=True)
        apply_oracle(state, self.oracle)
        self._check_clear(state)
        state.apply_on("index", self._uniform)
        self.applications += 1
        return state

    def prepared(self) -> StateVector:
        return self.apply(StateVector.zeros(self.layout))


def flag_zero_mass(state: StateVector, flag: str = "flag") -> float:
    return float(state.probabilities(flag)[0])


def fix_global_phase(amps: np.ndarray) -> np.ndarray:
    """Rotate so the largest-magnitude amplitude is real and positive."""
    flat = amps.reshape(-1)
    k = int(np.argmax(np.abs(flat)))
    if abs(flat[k]) == 0:
        return amps
    return amps * (abs(flat[k]) / flat[k])


def zero_mask(layout: Layout) -> np.ndarray:
    mask = np.zeros(layout.shape, dtype=bool)
    mask[(0,) * len(layout.shape)] = True
    return mask


def basis_values(layout: Layout, register: str, values: Sequence[int]) -> np.ndarray:
    ax = layout.axis(register)
    shape = [1] * len(layout.shape)
    shape[ax] = layout.shape[ax]
    return np.isin(np.arange(layout.shape[ax]), values).reshape(shape)
