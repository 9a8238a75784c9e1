"""Effort choice and willingness-to-pay under the four worker models.

All utilities are in cents: ``wage`` is cents per row and the effort cost is
``cost / 2 * e**2``. Each model is evaluated in two timing scenarios, with peer
information delivered before (``Scenario.EX_ANTE``) or after
(``Scenario.EX_POST``) the effort choice, and compared with the no-information
benchmark.

Efforts are kept as reals here; rounding to whole rows is the simulator's job.
"""

from __future__ import annotations

import math
from dataclasses import InitVar, dataclass
from enum import Enum
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "BeliefPMF",
    "EffortCostParams",
    "InvalidBeliefsError",
    "InvalidParameterError",
    "LearningParams",
    "Scenario",
    "SocialKind",
    "SocialPrefParams",
    "StressParams",
    "effort_no_info",
    "learning_effort",
    "learning_posterior",
    "learning_value_of_search",
    "learning_wtp",
    "social_effort",
    "social_effort_exante",
    "social_effort_expost",
    "social_objective_expost",
    "social_value_exante",
    "social_wtp",
    "stress_effort",
    "stress_wtp",
    "utility_no_info",
    "value_no_info",
]

_PROB_TOL = 1e-9


class InvalidParameterError(ValueError):
    """A parameter bundle violates its model's constraints."""


class InvalidBeliefsError(ValueError):
    """A belief pmf is empty, unnormalised or has an unsorted support."""


class Scenario(str, Enum):
    EX_ANTE = "exante"
    EX_POST = "expost"
    NO_INFO = "noinfo"


class SocialKind(str, Enum):
    COMPETITIVE = "competitive"
    INEQUALITY_AVERSE = "inequality_averse"


@dataclass(frozen=True)
class EffortCostParams:
    """Piece rate ``wage`` (cents/row) and quadratic cost curvature ``cost``."""

    wage: float
    cost: float

    def __post_init__(self) -> None:
        if not (self.wage > 0 and self.cost > 0):
            raise InvalidParameterError(f"wage and cost must be > 0, got {self.wage}, {self.cost}")
        if not math.isfinite(self.wage / self.cost):
            raise InvalidParameterError("baseline effort wage/cost is not finite")

    @property
    def baseline_effort(self) -> float:
        return self.wage / self.cost


@dataclass(frozen=True)
class BeliefPMF:
    """Finite pmf over peer averages (rows), or over productivities for the learning posterior."""

    support: tuple[float, ...]
    probs: tuple[float, ...]

    def __post_init__(self) -> None:
        support = tuple(float(x) for x in self.support)
        probs = tuple(float(x) for x in self.probs)
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "probs", probs)
        if not support:
            raise InvalidBeliefsError("belief support is empty")
        if len(support) != len(probs):
            raise InvalidBeliefsError(f"support has {len(support)} points but probs has {len(probs)}")
        if not all(math.isfinite(x) and x >= 0 for x in support):
            raise InvalidBeliefsError("support values must be finite and nonnegative")
        if any(b <= a for a, b in zip(support, support[1:])):
            raise InvalidBeliefsError("support must be strictly increasing")
        if any(not math.isfinite(q) or q < 0 for q in probs):
            raise InvalidBeliefsError("probabilities must be finite and nonnegative")
        if abs(math.fsum(probs) - 1.0) > _PROB_TOL:
            raise InvalidBeliefsError(f"probabilities sum to {math.fsum(probs)!r}, not 1")

    @classmethod
    def point(cls, value: float) -> BeliefPMF:
        return cls((value,), (1.0,))

    @classmethod
    def uniform(cls, values: Sequence[float]) -> BeliefPMF:
        values = sorted(values)
        return cls(tuple(values), tuple([1.0 / len(values)] * len(values)))

    @classmethod
    def from_weights(cls, support: Sequence[float], weights: Sequence[float]) -> BeliefPMF:
        """Normalise nonnegative ``weights`` and drop zero-mass points."""
        total = math.fsum(weights)
        if total <= 0:
            raise InvalidBeliefsError("weights must have positive total mass")
        pairs = sorted((float(x), w / total) for x, w in zip(support, weights) if w > 0)
        return cls(tuple(x for x, _ in pairs), tuple(q for _, q in pairs))

    @property
    def values(self) -> np.ndarray:
        return np.asarray(self.support)

    @property
    def weights(self) -> np.ndarray:
        return np.asarray(self.probs)

    def mean(self) -> float:
        return float(np.dot(self.weights, self.values))

    def expect(self, fn: Callable[[float], float]) -> float:
        return math.fsum(q * fn(x) for x, q in zip(self.support, self.probs))

    def cdf(self) -> np.ndarray:
        return np.cumsum(self.weights)


@dataclass(frozen=True)
class SocialPrefParams:
    """Piecewise-linear comparison utility ``f(x) = lambda1*x if x <= 0 else lambda2*x``.

    ``delta`` scales the comparison term when the information arrives after the
    task. Pass ``validate=False`` to build deliberately inconsistent bundles,
    e.g. negative controls for the theory checks.
    """

    lambda1: float
    lambda2: float
    kind: SocialKind
    delta: float = 1.0
    validate: InitVar[bool] = True

    def __post_init__(self, validate: bool) -> None:
        object.__setattr__(self, "kind", SocialKind(self.kind))
        if not validate:
            return
        if self.delta < 0:
            raise InvalidParameterError(f"delta must be >= 0, got {self.delta}")
        l1, l2 = self.lambda1, self.lambda2
        if self.kind is SocialKind.COMPETITIVE:
            if not l1 >= l2 > 0:
                raise InvalidParameterError(f"competitive needs lambda1 >= lambda2 > 0, got {l1}, {l2}")
        elif not (l1 > 0 and -1 < l2 < 0 and l1 >= abs(l2)):
            raise InvalidParameterError(
                f"inequality aversion needs lambda1 > 0, -1 < lambda2 < 0, lambda1 >= |lambda2|; got {l1}, {l2}"
            )


@dataclass(frozen=True)
class StressParams:
    """Linear stress cost ``theta * e_bar``; ``delta`` in [0, 1] scales it ex post."""

    theta: float
    delta: float = 1.0

    def __post_init__(self) -> None:
        if self.theta < 0:
            raise InvalidParameterError(f"theta must be >= 0, got {self.theta}")
        if not 0 <= self.delta <= 1:
            raise InvalidParameterError(f"stress delta must lie in [0, 1], got {self.delta}")

    def stress(self, e_bar: float) -> float:
        return self.theta * e_bar


@dataclass(frozen=True)
class LearningParams:
    """Strategy search with a Gaussian-kernel posterior over productivity.

    The posterior lives on ``grid_m`` evenly spaced points of
    ``[alpha_lo, alpha_hi]`` and is centred at ``loc_a + loc_b * y_bar``.
    """

    alpha_s: float
    alpha_lo: float
    alpha_hi: float
    search_cost: float
    grid_m: int = 41
    kernel_sigma: float = 0.15
    loc_a: float = 0.5
    loc_b: float = 0.02

    def __post_init__(self) -> None:
        if not self.alpha_s > 0:
            raise InvalidParameterError(f"alpha_s must be > 0, got {self.alpha_s}")
        if not 0 <= self.alpha_lo < self.alpha_hi:
            raise InvalidParameterError(f"need 0 <= alpha_lo < alpha_hi, got {self.alpha_lo}, {self.alpha_hi}")
        if not self.alpha_lo <= self.alpha_s <= self.alpha_hi:
            raise InvalidParameterError("alpha_s must lie inside [alpha_lo, alpha_hi]")
        if self.search_cost < 0:
            raise InvalidParameterError(f"search_cost must be >= 0, got {self.search_cost}")
        if int(self.grid_m) != self.grid_m or self.grid_m < 2:
            raise InvalidParameterError(f"grid_m must be an integer >= 2, got {self.grid_m}")
        if not self.kernel_sigma > 0:
            raise InvalidParameterError("kernel_sigma must be > 0")
        if not self.loc_b > 0:
            raise InvalidParameterError("loc_b must be > 0")

    @property
    def alpha_grid(self) -> np.ndarray:
        return np.linspace(self.alpha_lo, self.alpha_hi, int(self.grid_m))


def _require_scenario(scenario: Scenario, allowed: tuple[Scenario, ...]) -> Scenario:
    scenario = Scenario(scenario)
    if scenario not in allowed:
        raise ValueError(f"scenario {scenario.value!r} not allowed here; expected one of {[s.value for s in allowed]}")
    return scenario


# --- standard model ---------------------------------------------------------


def effort_no_info(p: EffortCostParams, alpha: float = 1.0) -> float:
    """Optimal effort without peer information, ``wage * alpha / cost``."""
    return p.wage * alpha / p.cost


def value_no_info(p: EffortCostParams, alpha: float = 1.0) -> float:
    return (p.wage * alpha) ** 2 / (2.0 * p.cost)


def utility_no_info(p: EffortCostParams, e, alpha: float = 1.0):
    """Earnings net of effort cost at effort ``e`` (scalar or array)."""
    return p.wage * alpha * e - 0.5 * p.cost * np.square(e)


# --- social preferences -----------------------------------------------------


def social_effort_exante(p: EffortCostParams, s: SocialPrefParams, e_bar: float) -> float:
    """Closed-form optimum after observing the peer average: bunch at ``e_bar`` between the kinks."""
    if e_bar < 0:
        raise ValueError(f"e_bar must be >= 0, got {e_bar}")
    lower = p.wage * (1.0 + s.lambda2) / p.cost
    upper = p.wage * (1.0 + s.lambda1) / p.cost
    if e_bar < lower:
        return lower
    if e_bar <= upper:
        return float(e_bar)
    return upper


def social_value_exante(p: EffortCostParams, s: SocialPrefParams, e_bar: float) -> float:
    """Indirect utility after observing ``e_bar`` (three-branch closed form)."""
    w, c = p.wage, p.cost
    lower = w * (1.0 + s.lambda2) / c
    upper = w * (1.0 + s.lambda1) / c
    if e_bar < lower:
        return w**2 * (1.0 + s.lambda2) ** 2 / (2.0 * c) - s.lambda2 * w * e_bar
    if e_bar <= upper:
        return w * e_bar - 0.5 * c * e_bar**2
    return w**2 * (1.0 + s.lambda1) ** 2 / (2.0 * c) - s.lambda1 * w * e_bar


def social_objective_expost(p: EffortCostParams, s: SocialPrefParams, beliefs: BeliefPMF, e):
    """Expected utility of committing to effort ``e`` before the average is revealed."""
    e = np.asarray(e, dtype=float)
    gap = p.wage * (e[..., None] - beliefs.values)
    comparison = np.where(gap <= 0, s.lambda1 * gap, s.lambda2 * gap) @ beliefs.weights
    return utility_no_info(p, e) + s.delta * comparison


def social_effort_expost(p: EffortCostParams, s: SocialPrefParams, beliefs: BeliefPMF) -> float:
    """Maximise the ex post objective exactly.

    The objective is a concave quadratic on each interval between belief
    support points, so its maximum is either a support point (a kink) or the
    stationary point of some interval clipped into that interval.
    """
    w, c, d = p.wage, p.cost, s.delta
    support = beliefs.values
    # mass strictly above each interval (e_k, e_{k+1}); the first interval starts at 0
    mass_above = 1.0 - np.concatenate(([0.0], np.cumsum(beliefs.weights)))
    lefts = np.concatenate(([0.0], support))
    rights = np.concatenate((support, [np.inf]))
    slope = w * (1.0 + d * (s.lambda1 * mass_above + s.lambda2 * (1.0 - mass_above)))
    stationary = np.clip(slope / c, lefts, rights)
    candidates = np.unique(np.concatenate(([0.0], support, stationary)))
    values = social_objective_expost(p, s, beliefs, candidates)
    return float(candidates[int(np.argmax(values))])


def social_effort(
    p: EffortCostParams,
    s: SocialPrefParams,
    scenario: Scenario,
    *,
    e_bar: float | None = None,
    beliefs: BeliefPMF | None = None,
) -> float:
    scenario = Scenario(scenario)
    if scenario is Scenario.NO_INFO:
        return effort_no_info(p)
    if scenario is Scenario.EX_ANTE:
        if e_bar is None:
            raise ValueError("ex ante effort needs the observed average e_bar")
        return social_effort_exante(p, s, e_bar)
    if beliefs is None:
        raise InvalidBeliefsError("ex post effort needs beliefs")
    return social_effort_expost(p, s, beliefs)


def social_wtp(p: EffortCostParams, s: SocialPrefParams, beliefs: BeliefPMF, scenario: Scenario) -> float:
    """Expected indirect utility with information minus the no-information value."""
    scenario = _require_scenario(scenario, (Scenario.EX_ANTE, Scenario.EX_POST))
    v0 = value_no_info(p)
    if scenario is Scenario.EX_ANTE:
        return beliefs.expect(lambda e_bar: social_value_exante(p, s, e_bar) - v0)
    e = social_effort_expost(p, s, beliefs)
    return float(social_objective_expost(p, s, beliefs, e)) - v0


# --- stress avoidance -------------------------------------------------------


def stress_effort(p: EffortCostParams, st: StressParams, scenario: Scenario = Scenario.NO_INFO) -> float:
    # stress is a lump-sum cost, so the marginal trade-off never moves
    Scenario(scenario)
    return effort_no_info(p)


def stress_wtp(p: EffortCostParams, st: StressParams, beliefs: BeliefPMF, scenario: Scenario) -> float:
    scenario = _require_scenario(scenario, (Scenario.EX_ANTE, Scenario.EX_POST))
    expected_stress = beliefs.expect(st.stress)
    if scenario is Scenario.EX_ANTE:
        return -expected_stress
    return -st.delta * expected_stress


# --- learning ---------------------------------------------------------------


def learning_posterior(l: LearningParams, y_bar: float) -> BeliefPMF:
    """Posterior over alternative-strategy productivity after seeing average output ``y_bar``."""
    if y_bar < 0:
        raise ValueError(f"y_bar must be >= 0, got {y_bar}")
    grid = l.alpha_grid
    centre = l.loc_a + l.loc_b * y_bar
    log_w = -np.square(grid - centre) / (2.0 * l.kernel_sigma**2)
    w = np.exp(log_w - log_w.max())
    w /= w.sum()
    return BeliefPMF(tuple(grid), tuple(w))


def learning_value_of_search(p: EffortCostParams, l: LearningParams, y_bar: float) -> float:
    post = learning_posterior(l, y_bar)
    alpha, f = post.values, post.weights
    better = alpha > l.alpha_s
    v_alpha = (p.wage * alpha) ** 2 / (2.0 * p.cost)
    kept = f[~better].sum()
    return float(v_alpha[better] @ f[better] + kept * value_no_info(p, l.alpha_s) - l.search_cost)


def _search_gain(p: EffortCostParams, l: LearningParams, y_bar: float) -> float:
    return learning_value_of_search(p, l, y_bar) - value_no_info(p, l.alpha_s)


def learning_wtp(p: EffortCostParams, l: LearningParams, beliefs_y: BeliefPMF, scenario: Scenario) -> float:
    scenario = _require_scenario(scenario, (Scenario.EX_ANTE, Scenario.EX_POST))
    if scenario is Scenario.EX_POST:
        return 0.0
    return beliefs_y.expect(lambda y: max(_search_gain(p, l, y), 0.0))


def learning_effort(
    p: EffortCostParams,
    l: LearningParams,
    scenario: Scenario,
    *,
    y_bar: float | None = None,
    draw: float | None = None,
) -> tuple[float, float]:
    """Return ``(effort, adopted_alpha)``.

    Ex ante, a worker who finds search worthwhile draws a strategy from the
    posterior by inverse CDF at ``draw`` and keeps it only if it beats the
    baseline strategy.
    """
    scenario = Scenario(scenario)
    baseline = (effort_no_info(p, l.alpha_s), l.alpha_s)
    if scenario is not Scenario.EX_ANTE:
        return baseline
    if y_bar is None or draw is None:
        raise ValueError("ex ante learning effort needs y_bar and draw")
    if not 0.0 <= draw < 1.0:
        raise ValueError(f"draw must lie in [0, 1), got {draw}")
    if _search_gain(p, l, y_bar) < 0:
        return baseline
    post = learning_posterior(l, y_bar)
    idx = min(int(np.searchsorted(post.cdf(), draw, side="right")), len(post.support) - 1)
    adopted = max(post.support[idx], l.alpha_s)
    return effort_no_info(p, adopted), adopted
