import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from peerinfo.models import (
    BeliefPMF,
    EffortCostParams,
    InvalidBeliefsError,
    InvalidParameterError,
    LearningParams,
    Scenario,
    SocialKind,
    SocialPrefParams,
    StressParams,
    effort_no_info,
    learning_effort,
    learning_posterior,
    learning_value_of_search,
    learning_wtp,
    social_effort,
    social_effort_exante,
    social_effort_expost,
    social_wtp,
    stress_effort,
    stress_wtp,
    value_no_info,
)
from peerinfo.oracle import UtilitySpec, oracle_maximize

P = EffortCostParams(1.0, 0.1)
COMP = SocialPrefParams(0.5, 0.2, SocialKind.COMPETITIVE)
IA = SocialPrefParams(0.5, -0.2, SocialKind.INEQUALITY_AVERSE)

baselines = st.floats(10.0, 40.0)
half_points = st.lists(st.integers(0, 120), min_size=1, max_size=4, unique=True)


@st.composite
def beliefs(draw):
    pts = sorted(draw(half_points))
    w = draw(st.lists(st.floats(0.05, 1.0), min_size=len(pts), max_size=len(pts)))
    return BeliefPMF.from_weights([x / 2 for x in pts], w)


@st.composite
def competitive(draw):
    l2 = draw(st.floats(0.01, 1.0))
    return SocialPrefParams(l2 + draw(st.floats(0.0, 1.0)), l2, SocialKind.COMPETITIVE, draw(st.floats(0.05, 1.0)))


@st.composite
def inequality_averse(draw):
    l1 = draw(st.floats(0.02, 1.0))
    l2 = -draw(st.floats(0.01, 0.99)) * min(l1, 0.99)
    return SocialPrefParams(l1, l2, SocialKind.INEQUALITY_AVERSE, draw(st.floats(0.0, 1.0)))


# --- parameter containers ---------------------------------------------------


@pytest.mark.parametrize("w,c", [(0, 1), (1, 0), (-1, 1), (math.inf, 1), (1, math.nan)])
def test_effort_cost_rejects_bad_values(w, c):
    with pytest.raises(InvalidParameterError):
        EffortCostParams(w, c)


@pytest.mark.parametrize(
    "support,probs",
    [((), ()), ((1, 2), (1.0,)), ((2, 1), (0.5, 0.5)), ((1, 1), (0.5, 0.5)), ((-1,), (1,)), ((1, 2), (0.6, 0.6)), ((1, 2), (1.2, -0.2))],
)
def test_belief_pmf_invariants(support, probs):
    with pytest.raises(InvalidBeliefsError):
        BeliefPMF(support, probs)


def test_belief_pmf_helpers():
    b = BeliefPMF.uniform([10, 20, 30])
    assert b.mean() == pytest.approx(20.0)
    assert b.cdf()[-1] == pytest.approx(1.0)
    assert BeliefPMF.point(13).support == (13.0,)


@pytest.mark.parametrize(
    "l1,l2,kind",
    [(0.1, 0.2, "competitive"), (0.5, 0.0, "competitive"), (0.5, -1.0, "inequality_averse"), (0.1, -0.2, "inequality_averse"), (0.0, -0.0, "inequality_averse")],
)
def test_social_params_reject_inconsistent(l1, l2, kind):
    with pytest.raises(InvalidParameterError):
        SocialPrefParams(l1, l2, kind)


def test_social_params_can_skip_validation():
    s = SocialPrefParams(0.5, -0.3, SocialKind.COMPETITIVE, validate=False)
    assert s.lambda2 == -0.3


def test_stress_and_learning_validation():
    with pytest.raises(InvalidParameterError):
        StressParams(-0.1)
    with pytest.raises(InvalidParameterError):
        StressParams(0.1, 1.5)
    with pytest.raises(InvalidParameterError):
        LearningParams(1.0, 1.2, 1.5, 0.0)
    with pytest.raises(InvalidParameterError):
        LearningParams(1.0, 0.5, 1.5, 0.0, loc_b=0.0)
    with pytest.raises(InvalidParameterError):
        LearningParams(1.0, 0.5, 1.5, 0.0, grid_m=1)


# --- standard model ---------------------------------------------------------


@pytest.mark.parametrize("w,c,expected", [(1, 0.1, 10.0), (1, 1, 1.0), (2, 0.05, 40.0)])
def test_effort_no_info(w, c, expected):
    assert effort_no_info(EffortCostParams(w, c)) == expected


def test_effort_no_info_matches_fine_oracle():
    p = EffortCostParams(2, 0.05)
    arg, val = oracle_maximize(UtilitySpec("standard", Scenario.NO_INFO, p), 39.0, 41.0, 1e-6)
    assert abs(arg - 40.0) <= 1e-6
    assert val == pytest.approx(value_no_info(p), rel=1e-12)


@given(baselines, st.floats(0.2, 3.0))
def test_no_info_effort_is_w_over_c(b, w):
    p = EffortCostParams(w, w / b)
    assert effort_no_info(p) == w / (w / b)


# --- social preferences -----------------------------------------------------


@pytest.mark.parametrize("e_bar,expected", [(5, 12.0), (13, 13.0), (20, 15.0)])
def test_social_exante_branches(e_bar, expected):
    # frozen from oracle_maximize over [0, 30], step 1e-4
    assert social_effort(P, COMP, Scenario.EX_ANTE, e_bar=e_bar) == pytest.approx(expected, abs=1e-12)


def test_social_expost_point_mass_equals_exante():
    assert social_effort(P, COMP, Scenario.EX_POST, beliefs=BeliefPMF.point(13)) == 13.0


@pytest.mark.parametrize("s,expected", [(COMP, 13.5), (IA, 11.5)])
def test_social_expost_two_point_beliefs(s, expected):
    # frozen from oracle_maximize over [0, 30], step 1e-4
    assert social_effort_expost(P, s, BeliefPMF((8.0, 14.0), (0.5, 0.5))) == pytest.approx(expected, abs=1e-9)


def test_social_effort_errors():
    with pytest.raises(InvalidBeliefsError):
        social_effort(P, COMP, Scenario.EX_POST)
    with pytest.raises(ValueError):
        social_effort(P, COMP, Scenario.EX_ANTE)
    with pytest.raises(ValueError):
        social_effort_exante(P, COMP, -1.0)


def test_competitive_wtp_positive_at_own_baseline():
    # frozen oracle value: lambda2^2 * w^2 / 2c
    assert social_wtp(P, COMP, BeliefPMF.point(10.0), Scenario.EX_ANTE) == pytest.approx(0.2, abs=1e-12)


@given(inequality_averse(), beliefs(), baselines)
def test_inequality_averse_exante_wtp_nonpositive(s, b, base):
    assert social_wtp(EffortCostParams(1, 1 / base), s, b, Scenario.EX_ANTE) <= 1e-12


@given(st.one_of(competitive(), inequality_averse()), beliefs(), baselines)
def test_exante_wtp_at_least_expost_at_unit_delta(s, b, base):
    s = SocialPrefParams(s.lambda1, s.lambda2, s.kind, 1.0)
    p = EffortCostParams(1, 1 / base)
    assert social_wtp(p, s, b, Scenario.EX_ANTE) >= social_wtp(p, s, b, Scenario.EX_POST) - 1e-9


@given(competitive(), beliefs(), baselines)
def test_competitive_effort_rises_in_both_scenarios(s, b, base):
    p = EffortCostParams(1, 1 / base)
    assert all(social_effort_exante(p, s, x) > base for x in b.support)
    assert social_effort_expost(p, s, b) > base


@given(competitive(), beliefs(), st.floats(0.01, 0.2), st.floats(1.01, 2.0))
def test_competitive_wtp_increasing_in_baseline(s, b, c, ratio):
    p_hi, p_lo = EffortCostParams(1, c), EffortCostParams(1, c * ratio)
    assert social_wtp(p_hi, s, b, Scenario.EX_ANTE) > social_wtp(p_lo, s, b, Scenario.EX_ANTE)


@given(inequality_averse(), st.integers(0, 120), baselines)
def test_inequality_averse_point_mass_distance(s, x2, base):
    x = x2 / 2
    p = EffortCostParams(1, 1 / base)
    ante = social_effort_exante(p, s, x)
    post = social_effort_expost(p, s, BeliefPMF.point(x))
    assert abs(ante - x) <= abs(base - x) + 1e-12
    assert abs(post - x) >= abs(ante - x) - 1e-9
    s1 = SocialPrefParams(s.lambda1, s.lambda2, s.kind, 1.0)
    assert social_effort_expost(p, s1, BeliefPMF.point(x)) == pytest.approx(social_effort_exante(p, s1, x), abs=1e-9)


@given(st.one_of(competitive(), inequality_averse()), beliefs(), st.floats(10, 30))
def test_expost_solver_matches_oracle(s, b, base):
    p = EffortCostParams(1.0, 1.0 / base)
    hi = math.ceil(1.25 * max(p.wage * (1 + s.lambda1) / p.cost, b.support[-1]) + 1)
    arg, val = oracle_maximize(UtilitySpec("social", Scenario.EX_POST, p, s, b), 0.0, hi, 1e-3)
    e = social_effort_expost(p, s, b)
    v = social_wtp(p, s, b, Scenario.EX_POST) + value_no_info(p)
    assert abs(arg - e) <= 2e-3
    assert abs(val - v) <= 1e-8 * max(abs(v), value_no_info(p))


# --- stress -----------------------------------------------------------------


def test_stress_examples():
    b = BeliefPMF.uniform([10, 20, 30])
    st_ = StressParams(0.01, 0.5)
    assert stress_wtp(P, st_, b, Scenario.EX_ANTE) == pytest.approx(-0.2, abs=1e-15)
    assert stress_wtp(P, st_, b, Scenario.EX_POST) == pytest.approx(-0.1, abs=1e-15)
    zero = StressParams(0.0)
    assert stress_wtp(P, zero, b, Scenario.EX_ANTE) == 0.0
    assert stress_wtp(P, zero, b, Scenario.EX_POST) == 0.0


@given(st.floats(0, 1), st.floats(0, 1), beliefs(), baselines)
def test_stress_ordering_and_effort(theta, delta, b, base):
    p = EffortCostParams(1, 1 / base)
    st_ = StressParams(theta, delta)
    ante, post = stress_wtp(p, st_, b, Scenario.EX_ANTE), stress_wtp(p, st_, b, Scenario.EX_POST)
    assert ante <= post <= 0
    assert {stress_effort(p, st_, s) for s in Scenario} == {effort_no_info(p)}


def test_stress_wtp_rejects_no_info_scenario():
    with pytest.raises(ValueError):
        stress_wtp(P, StressParams(0.1), BeliefPMF.point(1), Scenario.NO_INFO)


# --- learning ---------------------------------------------------------------


def test_posterior_flat_kernel():
    post = learning_posterior(LearningParams(1.0, 0.5, 1.5, 0.0, grid_m=2, kernel_sigma=1e6), 20.0)
    assert post.probs == pytest.approx((0.5, 0.5), abs=1e-9)


def test_posterior_mass_at_bottom_when_centre_far_below():
    post = learning_posterior(LearningParams(1.0, 0.5, 1.5, 0.0, kernel_sigma=0.05, loc_a=-50.0, loc_b=0.01), 0.0)
    assert post.probs[0] == pytest.approx(1.0)


@given(st.floats(0, 100), st.floats(0.01, 50), st.floats(0.01, 1.0), st.integers(2, 60))
def test_posterior_fosd_in_average(y, dy, sigma, m):
    l = LearningParams(1.0, 0.5, 1.5, 0.0, grid_m=m, kernel_sigma=sigma, loc_b=0.02)
    lo, hi = learning_posterior(l, y).cdf(), learning_posterior(l, y + dy).cdf()
    assert np.all(hi <= lo + 1e-12)


def test_value_of_search_limits():
    p = P
    at_alpha_s = LearningParams(1.0, 0.5, 1.5, 0.0, grid_m=3, kernel_sigma=1e-3, loc_a=1.0, loc_b=1e-9)
    assert learning_value_of_search(p, at_alpha_s, 0.0) == pytest.approx(value_no_info(p))
    costly = LearningParams(1.0, 0.5, 1.5, (1.5**2) / (2 * 0.1), kernel_sigma=0.3)
    assert learning_value_of_search(p, costly, 30.0) < value_no_info(p)
    assert learning_wtp(p, costly, BeliefPMF.uniform([10, 30]), Scenario.EX_ANTE) == 0.0


@given(st.floats(0.6, 1.4), st.floats(0, 5), st.integers(2, 40), st.floats(0.05, 0.5), st.floats(0, 80))
def test_value_of_search_matches_independent_sum(alpha_s, k, m, sigma, y):
    l = LearningParams(alpha_s, 0.5, 1.5, k, grid_m=m, kernel_sigma=sigma, loc_a=0.4, loc_b=0.02)
    w, c = P.wage, P.cost
    grid = [0.5 + i * (1.0 / (m - 1)) for i in range(m)]
    centre = 0.4 + 0.02 * y
    raw = [math.exp(-((a - centre) ** 2) / (2 * sigma**2) + ((grid[0] - centre) ** 2) / (2 * sigma**2)) for a in grid]
    # rescale by the largest weight to avoid underflow, as any normalisation is fine
    top = max(raw)
    f = [r / top for r in raw]
    total = math.fsum(f)
    expected = -k
    for a, q in zip(grid, f):
        expected += q / total * (w * max(a, alpha_s)) ** 2 / (2 * c)
    assert learning_value_of_search(P, l, y) == pytest.approx(expected, rel=1e-9, abs=1e-9)


def test_learning_effort_three_point_posterior():
    # alpha grid {0.5, 1, 1.5}, centre 1.0, sigma 0.5: probs proportional to (e^-0.5, 1, e^-0.5)
    l = LearningParams(1.0, 0.5, 1.5, 1.0, grid_m=3, kernel_sigma=0.5, loc_a=0.5, loc_b=0.02)
    q = math.exp(-0.5) / (1 + 2 * math.exp(-0.5))
    assert learning_posterior(l, 25.0).probs == pytest.approx((q, 1 - 2 * q, q))
    # searching is worth it: q*V(1.5) + (1-q)*V(1) - K = 6.71 >= 5
    assert learning_effort(P, l, Scenario.EX_ANTE, y_bar=25.0, draw=0.9) == pytest.approx((15.0, 1.5))
    assert learning_effort(P, l, Scenario.EX_ANTE, y_bar=25.0, draw=0.5) == pytest.approx((10.0, 1.0))
    assert learning_effort(P, l, Scenario.EX_ANTE, y_bar=25.0, draw=0.1) == pytest.approx((10.0, 1.0))


def test_learning_effort_rules():
    l = LearningParams(1.0, 0.5, 1.5, 100.0)
    assert learning_effort(P, l, Scenario.EX_POST) == (10.0, 1.0)
    assert learning_effort(P, l, Scenario.NO_INFO) == (10.0, 1.0)
    assert learning_effort(P, l, Scenario.EX_ANTE, y_bar=80.0, draw=0.99) == (10.0, 1.0)
    with pytest.raises(ValueError):
        learning_effort(P, l, Scenario.EX_ANTE, y_bar=10.0, draw=1.0)
    with pytest.raises(ValueError):
        learning_effort(P, l, Scenario.EX_ANTE, y_bar=10.0, draw=-0.1)


@given(st.floats(0.55, 1.45), st.floats(0.0, 3.0), st.floats(0.0, 1.0 - 1e-9), st.floats(0, 80))
def test_learning_effort_never_below_baseline(alpha_s, k, draw, y):
    l = LearningParams(alpha_s, 0.5, 1.5, k, kernel_sigma=0.2)
    assert learning_effort(P, l, Scenario.EX_ANTE, y_bar=y, draw=draw)[0] >= effort_no_info(P, alpha_s)


@given(st.floats(0.0, 3.0), beliefs())
def test_learning_wtp_signs_and_monotonicity(k, b):
    alphas = np.linspace(0.5, 1.5, 11)
    wtps = [learning_wtp(P, LearningParams(a, 0.5, 1.5, k, kernel_sigma=0.2), b, Scenario.EX_ANTE) for a in alphas]
    assert min(wtps) >= 0
    assert all(x >= y - 1e-12 for x, y in zip(wtps, wtps[1:]))
    assert learning_wtp(P, LearningParams(1.0, 0.5, 1.5, k), b, Scenario.EX_POST) == 0.0
