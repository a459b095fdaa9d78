"""Amplitude amplification with a success guarantee for every a >= a_lower.

A fixed number of plain Grover rounds overshoots whenever the true mass
``a`` is well above the known lower bound, so the rounds here use the
phase-matched reflections of fixed-point search (Yoder, Low and Chuang,
PRL 113, 210501): after ``l`` rounds the flag-0 mass is
``1 - delta^2 T_L(T_{1/L}(1/delta) sqrt(1-a))^2 >= 1 - delta^2`` for all
``a >= a_lower``, with ``L = 2l + 1`` uses of U or U^dagger and
``L = O(1/sqrt(a_lower))``. We take ``1 - delta^2`` just above 1/2.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import ContractError, DomainError
from ..ledger import CostLedger
from .state import StateVector, flag_zero_mass, zero_mask

# uses of U/U^dagger never exceed C_A / sqrt(a_lower): L <= acosh(sqrt 2)/sqrt(a') + 2
C_A = 3.0
TARGET_MASS = 0.5
_DELTA2 = 0.5 * (1 - 1e-9)


@dataclass(frozen=True)
class Schedule:
    a_lower: float
    rounds: int
    alphas: tuple[float, ...]
    betas: tuple[float, ...]

    @property
    def applications(self) -> int:
        return 2 * self.rounds + 1


def fixed_point_schedule(a_lower: float) -> Schedule:
    if not 0 < a_lower <= 1:
        raise DomainError("a_lower must lie in (0, 1]")
    if a_lower >= TARGET_MASS:
        return Schedule(a_lower, 0, (), ())
    ad = math.acosh(1 / math.sqrt(_DELTA2))
    L = math.ceil(ad / math.acosh(1 / math.sqrt(1 - a_lower)))
    if L % 2 == 0:
        L += 1
    l = (L - 1) // 2
    g = 1 / math.cosh(ad / L)
    root = math.sqrt(1 - g * g)
    alphas = tuple(2 * math.atan2(1, math.tan(2 * math.pi * j / L) * root) for j in range(1, l + 1))
    betas = tuple(-alphas[l - j] for j in range(1, l + 1))
    return Schedule(a_lower, l, alphas, betas)


def predicted_mass(a: float, schedule: Schedule) -> float:
    """Closed-form flag-0 mass after the schedule for true mass ``a``."""
    if schedule.rounds == 0:
        return a
    L = schedule.applications
    ad = math.acosh(1 / math.sqrt(_DELTA2))
    x = math.cosh(ad / L) * math.sqrt(1 - a)
    TL = math.cos(L * math.acos(x)) if x <= 1 else math.cosh(L * math.acosh(x))
    return 1 - _DELTA2 * TL * TL


class AmplifiedUnitary:
    """V built from a state-preparation unitary ``U`` (with ``apply``/``adjoint``).

    ``U`` must mark good states with flag qubit 0. The first application of
    U also lets the exact simulator read the true mass ``a`` and raise if the
    caller's lower bound was wrong.
    """

    def __init__(self, U, a_lower: float, flag: str = "flag", ledger: CostLedger | None = None,
                 check: bool = True):
        self.U = U
        self.flag = flag
        self.schedule = fixed_point_schedule(a_lower)
        self.ledger = ledger
        self.check = check
        self.observed_a: float | None = None

    @property
    def rounds(self) -> int:
        return self.schedule.rounds

    @property
    def applications(self) -> int:
        return self.schedule.applications

    def _good(self, state: StateVector) -> np.ndarray:
        return state.register_values(self.flag) == 0

    def apply(self, state: StateVector | None = None) -> StateVector:
        if state is None:
            state = StateVector.zeros(self.U.layout)
        self.U.apply(state)
        a = flag_zero_mass(state, self.flag)
        self.observed_a = a
        if self.check and a < self.schedule.a_lower * (1 - 1e-9):
            raise ContractError(f"flag-0 mass {a:.6g} below promised lower bound {self.schedule.a_lower:.6g}")
        good = self._good(state)
        zero = zero_mask(state.layout)
        for alpha, beta in zip(self.schedule.alphas, self.schedule.betas):
            state.phase_where(good, np.exp(1j * beta))
            self.U.adjoint(state)
            state.phase_where(zero, np.exp(-1j * alpha))
            self.U.apply(state)
            state.amplitudes *= -1
        if self.ledger is not None and self.rounds:
            self.ledger.charge(amplification_rounds=self.rounds)
        return state


def amplitude_amplify(U, flag: str, a_lower: float, ledger: CostLedger | None = None,
                      check: bool = True) -> AmplifiedUnitary:
    return AmplifiedUnitary(U, a_lower, flag=flag, ledger=ledger, check=check)
