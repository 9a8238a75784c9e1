import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from sklearn.base import clone

from peerinfo.classifier import ClassifierConfig, ProfileTypeClassifier, WorkerType, classify, classify_triple, type_shares
from peerinfo.elicitation import PerformanceBin, WtpSchedule

T = WorkerType
cents = st.integers(-50, 50)


@pytest.mark.parametrize(
    "triple,expected",
    [((0, 0, 0), T.INDIFFERENT), ((-3, 0, 0), T.STRESS_AVOIDANT), ((-5, -5, -5), T.STRESS_AVOIDANT),
     ((0, 2, 5), T.COMPETITIVE), ((2, 2, 3), T.COMPETITIVE), ((-1, 0, 1), T.COMPETITIVE), ((3, 3, 3), T.LEARNING_RESIDUAL),
     ((5, 2, 0), T.LEARNING_RESIDUAL), ((-2, 4, 1), T.LEARNING_RESIDUAL)],
)
def test_classify_triple_examples(triple, expected):
    assert classify_triple(*triple) is expected


def test_epsilon_zeroes_small_entries():
    assert classify_triple(-1, 0, 1, epsilon=1) is T.INDIFFERENT
    assert classify_triple(-1, 0, 1) is T.COMPETITIVE


def test_full_cube_is_partitioned():
    counts = {t: 0 for t in T}
    for a, b, c in itertools.product(range(-50, 51), repeat=3):
        counts[classify_triple(a, b, c)] += 1
    assert sum(counts.values()) == 101**3
    assert counts[T.INDIFFERENT] == 1
    assert counts[T.STRESS_AVOIDANT] == 51**3 - 1
    # weakly increasing triples, minus constant ones, minus non-constant ones with no positive entry
    assert counts[T.COMPETITIVE] == math.comb(103, 3) - 101 - (math.comb(53, 3) - 51)


@given(cents, cents, cents, st.integers(1, 5))
def test_positive_scaling_invariance(a, b, c, k):
    assert classify_triple(a, b, c) is classify_triple(k * a, k * b, k * c)


@given(cents, cents, cents, st.integers(0, 50))
def test_large_epsilon_only_reduces_to_indifferent(a, b, c, eps):
    if max(abs(a), abs(b), abs(c)) <= eps:
        assert classify_triple(a, b, c, eps) is T.INDIFFERENT


def _schedule(ante):
    return WtpSchedule.from_array(list(ante) + [0] * 9)


def test_classify_uses_configured_probe_bins():
    s = _schedule([0, -4, 0, 0, 0, 0, 0, 3, 0])
    assert classify(s) is T.INDIFFERENT
    cfg = ClassifierConfig((PerformanceBin(2), PerformanceBin(5), PerformanceBin(8)))
    assert classify(s, cfg) is T.COMPETITIVE


@pytest.mark.parametrize("bins,eps", [((1, 1, 9), 0), ((9, 5, 1), 0), ((1, 5), 0), ((1, 5, 9), -1)])
def test_config_validation(bins, eps):
    with pytest.raises(ValueError):
        ClassifierConfig(tuple(PerformanceBin(b) for b in bins), eps)


def test_type_shares():
    shares = type_shares([1, 1, 2, 4])
    assert shares == {T.INDIFFERENT: 0.5, T.STRESS_AVOIDANT: 0.25, T.COMPETITIVE: 0.0, T.LEARNING_RESIDUAL: 0.25}
    with pytest.raises(ValueError):
        type_shares([])


def test_estimator_matches_function_and_clones():
    rng = np.random.default_rng(0)
    X = rng.integers(-50, 51, size=(200, 18))
    est = ProfileTypeClassifier().fit(X)
    expected = [int(classify(WtpSchedule.from_array(row))) for row in X]
    assert est.predict(X).tolist() == expected
    assert est.predict(X[:, :9]).tolist() == expected
    assert clone(est).get_params() == est.get_params()
    assert est.classes_.tolist() == [1, 2, 3, 4]
    with pytest.raises(ValueError):
        est.predict(X[:, :5])
