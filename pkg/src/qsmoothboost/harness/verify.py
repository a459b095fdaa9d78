"""Named invariant suites, each printing one verdict per property."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..boost_classical import iteration_bound, smoothboost_run
from ..boost_quantum import EPS_REL, qsmoothboost_run
from ..dataset import SyntheticTask, draw_sample
from ..errors import ConfigurationError
from ..qsim import ExactBackend, WeightOracle, approx_count
from ..weak_learn import StumpLearner

GAMMAS = (0.1, 0.25, 0.4)


@dataclass(frozen=True)
class Verdict:
    name: str
    ok: bool
    detail: str

    def line(self) -> str:
        return f"[{'PASS' if self.ok else 'FAIL'}] {self.name}: {self.detail}"


def _random_classical_runs(count: int, seed: int):
    """(S, kappa, gamma, report) for randomized classical runs on majority and threshold tasks."""
    rng = np.random.default_rng(seed)
    for j in range(count):
        gamma = float(rng.choice(GAMMAS))
        m = int(rng.choice([32, 64, 128, 256]))
        if rng.random() < 0.5:
            task = SyntheticTask("majority", 20, int(rng.choice([3, 5])))
        else:
            task = SyntheticTask("threshold", 1, 1, float(rng.uniform(0.2, 0.5)), 1.0)
        kappa = float(rng.choice([0.1, 0.15, 0.25]))
        S = draw_sample(task, m, (seed, j))
        _, rep = smoothboost_run(StumpLearner(), S, kappa, gamma, 16, seed=(seed, j))
        yield S, kappa, gamma, rep


def suite_smoothness(count: int = 20, seed: int = 0) -> list[Verdict]:
    out = []
    for j, (S, kappa, gamma, rep) in enumerate(_random_classical_runs(count, seed)):
        worst = max((r.max_D * kappa * S.m for r in rep.iterations), default=0.0)
        out.append(Verdict(f"smoothness run {j}", worst <= 1 + 1e-12,
                           f"m={S.m} gamma={gamma} kappa={kappa} T={rep.T} max kappa*m*D = {worst:.12f}"))
    return out


def suite_iteration_bound(count: int = 20, seed: int = 1) -> list[Verdict]:
    out = []
    for j, (S, kappa, gamma, rep) in enumerate(_random_classical_runs(count, seed)):
        bound = iteration_bound(kappa, gamma)
        if rep.weak_guarantee_held:
            out.append(Verdict(f"iteration bound run {j}", rep.T < bound, f"T={rep.T} < {bound:.1f}"))
        else:
            out.append(Verdict(f"iteration bound run {j}", True,
                               f"T={rep.T}; weak guarantee missed, bound not applicable"))
    return out


def suite_error_bound(count: int = 10, seed: int = 2) -> list[Verdict]:
    out = []
    task = SyntheticTask("majority", 20, 5)
    kappa, gamma = (1 / 3) / 2.2, 0.1875
    for s in range(seed, seed + count):
        S = draw_sample(task, 128, s)
        _, rep = smoothboost_run(StumpLearner(), S, kappa, gamma, 32, seed=s)
        bad = [r.t for r in rep.iterations if not r.error_bound_holds()]
        final_ok = rep.final_wrong < kappa * S.m
        out.append(Verdict(f"error bound seed {s}", not bad and final_ok,
                           f"{len(rep.iterations)} iterations, violations at {bad}, "
                           f"final error {float(rep.empirical_error):.4f} < kappa={kappa:.4f}"))
    return out


def suite_stateprep(m: int = 64, count: int = 5, seed: int = 3) -> list[Verdict]:
    out = []
    rng = np.random.default_rng(seed)
    kappa = 0.25
    be = ExactBackend()
    for j in range(count):
        M = rng.uniform(kappa, 1.0, size=m)
        prep = be.prepare_distribution_state(WeightOracle(M), m, kappa, rng)
        dev = float(np.max(np.abs(np.abs(prep.amplitudes[:m]) ** 2 - M / math.fsum(M))))
        out.append(Verdict(f"stateprep m={m} vector {j}", dev < 1e-9,
                           f"max amplitude deviation {dev:.3e}, attempts {prep.attempts}"))
    return out


def suite_counting(count: int = 20, seed: int = 4, eps_rel: float = EPS_REL,
                   delta: float = 0.05) -> list[Verdict]:
    rng = np.random.default_rng(seed)
    hits = 0
    for _ in range(count):
        N = int(rng.choice([8, 16, 32, 64]))
        z = rng.uniform(0.05, 1.0, size=N)
        z[0] = 1.0
        s = math.fsum(z)
        est = approx_count(WeightOracle(z), eps_rel, delta, rng).estimate
        hits += (1 - eps_rel) * s <= est <= (1 + eps_rel) * s
    return [Verdict("counting band", hits >= 0.9 * count, f"{hits}/{count} estimates inside the band")]


def suite_equivalence(count: int = 5, seed: int = 5) -> list[Verdict]:
    out = []
    task = SyntheticTask("majority", 20, 5)
    kappa, gamma = (1 / 3) / 2.2, 0.1875
    for s in range(seed, seed + count):
        S = draw_sample(task, 64, s)
        ec, rc = smoothboost_run(StumpLearner(), S, kappa, gamma, 32, seed=s, feed="weighted")
        eq, rq = qsmoothboost_run(StumpLearner(), S, kappa, gamma, 32, seed=s, feed="weighted",
                                  force_exact_sum=True)
        same = rc.T == rq.T and ec.describe() == eq.describe()
        out.append(Verdict(f"equivalence seed {s}", same, f"T classical={rc.T} quantum={rq.T}"))
    return out


SUITES = {
    "smoothness": suite_smoothness,
    "iteration-bound": suite_iteration_bound,
    "error-bound": suite_error_bound,
    "stateprep": suite_stateprep,
    "counting": suite_counting,
    "equivalence": suite_equivalence,
}


def verify(name: str, log=print) -> list[Verdict]:
    if name not in SUITES:
        raise ConfigurationError(f"suite: unknown suite {name!r}; choose from {sorted(SUITES)}")
    verdicts = SUITES[name]()
    for v in verdicts:
        log(v.line())
    return verdicts
