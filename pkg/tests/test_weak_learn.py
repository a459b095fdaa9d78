import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from qsmoothboost.dataset import LabeledExample, LabeledSample, SyntheticTask
from qsmoothboost.errors import ConfigurationError, DomainError, ResourceError
from qsmoothboost.ledger import CostLedger
from qsmoothboost.qsim import Layout, StateVector
from qsmoothboost.weak_learn import (HypothesisTable, MeasuringQuantumLearner, PlantedLearner, Stump,
                                     StumpLearner, TargetHypothesis, WeakLearnerSpec, boost_confidence,
                                     confidence_runs, evaluate_superposed, example_stream, train_stump,
                                     train_weighted_stump, weighted_error)


def examples(points, labels):
    return [LabeledExample(tuple(map(float, p)), int(y)) for p, y in zip(points, labels)]


def brute_force_min_error(points, labels):
    """Exhaustive enumeration over features, every midpoint and a below-all cut, both polarities."""
    best = len(labels)
    for f in range(points.shape[1]):
        vals = sorted(set(points[:, f]))
        cuts = [vals[0] - 1] + [(a + b) / 2 for a, b in zip(vals, vals[1:])]
        for thr, pol in itertools.product(cuts, (1, -1)):
            pred = [pol if x[f] > thr else -pol for x in points]
            best = min(best, sum(p != y for p, y in zip(pred, labels)))
    return best


def test_separable_1d():
    h = train_stump(examples([[0.1], [0.2], [0.8], [0.9]], [-1, -1, 1, 1]))
    assert [h((x,)) for x in (0.1, 0.2, 0.8, 0.9)] == [-1, -1, 1, 1]


@pytest.mark.parametrize("label", [1, -1])
def test_constant_labels(label):
    pts = [[0.1, 0.3], [0.5, 0.2], [0.7, 0.9]]
    h = train_stump(examples(pts, [label] * 3))
    assert all(h(p) == label for p in pts)


@given(st.integers(0, 2**32 - 1))
def test_train_stump_matches_brute_force(seed):
    rng = np.random.default_rng(seed)
    pts = rng.integers(0, 4, size=(12, 2)).astype(float)
    ys = rng.choice([-1, 1], 12)
    h = train_stump(examples(pts, ys))
    err = int(np.count_nonzero(h.predict(pts) != ys))
    assert err == brute_force_min_error(pts, ys)
    assert 2 * err <= 12


def test_tie_break_lowest_feature_then_threshold():
    # both features separate equally well
    pts = [[0, 0], [1, 1]]
    h = train_stump(examples(pts, [-1, 1]))
    assert (h.feature, h.threshold, h.polarity) == (0, 0.5, 1)


def test_deterministic_and_empty():
    ex = examples(np.eye(3), [1, -1, 1])
    assert train_stump(ex) == train_stump(ex)
    with pytest.raises(DomainError):
        train_stump([])
    with pytest.raises(DomainError):
        train_stump([LabeledExample((0.0,), 1), LabeledExample((0.0, 1.0), 1)])


@given(st.integers(-5, 5), st.floats(-10, 10, allow_nan=False), st.sampled_from([1, -1]))
def test_stump_description_round_trip(f, thr, pol):
    s = Stump(abs(f), thr, pol)
    assert Stump.parse(s.describe()) == s
    assert s.describe().startswith(f"stump feature={abs(f)} threshold=")


def test_parse_rejects_garbage():
    with pytest.raises(ConfigurationError):
        Stump.parse("tree depth=2")


def test_weighted_stump_and_error():
    pts = np.array([[0.0], [1.0], [2.0], [3.0]])
    ys = np.array([1, -1, 1, 1])
    D = np.array([0.1, 0.6, 0.1, 0.2])
    h = train_weighted_stump(pts, ys, D)
    S = LabeledSample(pts, ys)
    assert weighted_error(h, S, D) == pytest.approx(0.1)


@pytest.mark.parametrize("delta,r", [(1 / 3, 1), (1 / 9, 2), (1 / 27, 3), (0.1, 3), (0.5, 1)])
def test_confidence_runs(delta, r):
    assert confidence_runs(delta) == r


class Counting:
    def __init__(self, inner):
        self.inner, self.calls = inner, 0

    def fit(self, ex):
        self.calls += 1
        return self.inner.fit(ex)


def test_boost_confidence_planted_target():
    task = SyntheticTask("majority", 20, 5)
    learner = Counting(PlantedLearner(TargetHypothesis(task)))
    ledger = CostLedger()
    res = boost_confidence(learner, 1 / 27, 0.2, example_stream(task, 0), 16, ledger=ledger)
    assert res.passed and res.estimated_error == 0
    assert learner.calls == 3 == ledger.weak_learner_calls


def test_boost_confidence_flags_failure():
    task = SyntheticTask("majority", 20, 5)
    res = boost_confidence(PlantedLearner(TargetHypothesis(task, -1)), 1 / 9, 0.2,
                           example_stream(task, 0), 8, check_budget=50)
    assert not res.passed and res.estimated_error == 1 and res.runs == 2


def test_boost_confidence_exhausted():
    task = SyntheticTask("majority", 20, 5)
    finite = iter([LabeledExample((0.0,) * 20, -1)] * 5)
    with pytest.raises(ResourceError):
        boost_confidence(StumpLearner(), 1 / 3, 0.2, finite, 8)


def test_spec_validation():
    WeakLearnerSpec(0.1, 4)
    with pytest.raises(DomainError):
        WeakLearnerSpec(0.1, 0)
    with pytest.raises(ConfigurationError):
        WeakLearnerSpec(0.1, 4, "neural")


def _superposed_setup():
    pts = np.array([[0.1], [0.6], [0.3], [0.9]])
    table = HypothesisTable()
    h0, h1 = Stump(0, 0.5, 1), Stump(0, 0.2, -1)
    table.register(h0)
    table.register(h1)
    layout = Layout((("hyp", 1), ("index", 2), ("label", 1)))
    return pts, table, (h0, h1), layout


def test_superposed_basis_and_involution():
    pts, table, hyps, layout = _superposed_setup()
    for k, h in enumerate(hyps):
        for i in range(4):
            st_ = StateVector.basis(layout, hyp=k, index=i, label=0)
            evaluate_superposed(st_, table, pts)
            expected = 0 if h(pts[i]) == 1 else 1
            assert st_.probabilities("label")[expected] == pytest.approx(1.0)
            evaluate_superposed(st_, table, pts)
            assert st_.probabilities("label")[0] == pytest.approx(1.0)
    assert table.ledger.hypothesis_queries == 16


def test_superposed_permutes_amplitudes():
    pts, table, hyps, layout = _superposed_setup()
    rng = np.random.default_rng(0)
    amps = rng.normal(size=layout.shape) + 1j * rng.normal(size=layout.shape)
    amps /= np.linalg.norm(amps)
    st_ = StateVector(layout, amps.copy())
    evaluate_superposed(st_, table, pts)
    for k, h in enumerate(hyps):
        for i in range(4):
            for b in (0, 1):
                nb = b ^ (h(pts[i]) == -1)
                assert st_.amplitudes[k, i, nb] == amps[k, i, b]


def test_superposed_unregistered():
    pts, table, _, _ = _superposed_setup()
    layout = Layout((("index", 2), ("label", 1)))
    with pytest.raises(ConfigurationError):
        evaluate_superposed(StateVector.zeros(layout), table, pts, hypothesis=Stump(0, 0.7, 1))


def test_measuring_learner_trains_on_measurements():
    class Q:
        def __init__(self, e):
            self.e = e

        def measure(self, rng):
            return self.e

    ex = examples([[0.1], [0.9]], [-1, 1])
    h = MeasuringQuantumLearner().fit_quantum([Q(e) for e in ex * 3], np.random.default_rng(0))
    assert h == train_stump(ex * 3)
