import numpy as np
import pytest

from peerinfo.models import BeliefPMF, EffortCostParams, Scenario, SocialKind, SocialPrefParams, StressParams
from peerinfo.oracle import NonFiniteUtilityError, UtilitySpec, oracle_maximize

P = EffortCostParams(1.0, 0.1)
COMP = SocialPrefParams(0.5, 0.2, SocialKind.COMPETITIVE)


def test_standard_argmax_and_value():
    assert oracle_maximize(UtilitySpec("standard", Scenario.NO_INFO, P), 0, 30, 1e-3) == pytest.approx((10.0, 5.0))


def test_returns_first_argmax_on_ties():
    # 9.5 and 10.5 sit symmetrically around the peak and tie exactly
    arg, _ = oracle_maximize(UtilitySpec("standard", Scenario.NO_INFO, P), 9.5, 10.5, 1.0)
    assert arg == 9.5


def test_social_exante_kink():
    arg, val = oracle_maximize(UtilitySpec("social", Scenario.EX_ANTE, P, COMP, 13.0), 0, 30, 1e-4)
    assert arg == pytest.approx(13.0, abs=1e-9)
    assert val == pytest.approx(4.55, abs=1e-9)


def test_stress_shifts_level_only():
    b = BeliefPMF.point(20.0)
    ante = UtilitySpec("stress", Scenario.EX_ANTE, P, StressParams(0.1), 20.0)
    post = UtilitySpec("stress", Scenario.EX_POST, P, StressParams(0.1, 0.5), b)
    assert oracle_maximize(ante, 0, 30, 1e-3) == pytest.approx((10.0, 3.0))
    assert oracle_maximize(post, 0, 30, 1e-3) == pytest.approx((10.0, 4.0))


def test_learning_uses_alpha():
    assert oracle_maximize(UtilitySpec("learning", Scenario.NO_INFO, P, alpha=1.5), 0, 30, 1e-3) == pytest.approx((15.0, 11.25))


@pytest.mark.parametrize(
    "kwargs,exc",
    [
        (dict(model="nope", scenario=Scenario.NO_INFO, effort=P), ValueError),
        (dict(model="social", scenario=Scenario.EX_ANTE, effort=P), TypeError),
        (dict(model="social", scenario=Scenario.EX_ANTE, effort=P, params=COMP, conditioning=BeliefPMF.point(1)), TypeError),
        (dict(model="social", scenario=Scenario.EX_POST, effort=P, params=COMP, conditioning=3.0), TypeError),
    ],
)
def test_spec_validation(kwargs, exc):
    with pytest.raises(exc):
        UtilitySpec(**kwargs)


def test_grid_errors():
    u = UtilitySpec("standard", Scenario.NO_INFO, P)
    with pytest.raises(ValueError):
        oracle_maximize(u, 1, 1, 0.1)
    with pytest.raises(ValueError):
        oracle_maximize(u, 0, 1, 0)
    with pytest.raises(ValueError):
        oracle_maximize(u, 0, 1e9, 1e-3)


@pytest.mark.filterwarnings("ignore:overflow:RuntimeWarning")
def test_non_finite_utility_is_reported():
    u = UtilitySpec("standard", Scenario.NO_INFO, EffortCostParams(1e305, 1.0))
    with pytest.raises(NonFiniteUtilityError):
        oracle_maximize(u, 0, 1e4, 1.0)


def test_chunked_scan_agrees_with_single_pass():
    u = UtilitySpec("social", Scenario.EX_POST, P, COMP, BeliefPMF((8.0, 14.0), (0.5, 0.5)))
    arg, val = oracle_maximize(u, 0, 30, 1e-5)  # three million points, several chunks
    grid = np.arange(0, 30 + 1e-9, 1e-3)
    assert arg == pytest.approx(grid[np.argmax(u(grid))], abs=1e-3)
    assert val == pytest.approx(4.8125, abs=1e-9)
