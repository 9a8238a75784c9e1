"""Numerical checks of every model prediction over sampled parameter grids.

Each claim is evaluated on every parameter combination of its model and
summarised by the worst violation found. A weak inequality ``lhs >= rhs``
has violation ``max(0, rhs - lhs)``; a strict one must clear ``rhs`` by a
margin, so its violation is ``max(0, rhs + 2*tol - lhs)``. A claim passes
when its worst violation is within its tolerance.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from peerinfo.models import (
    BeliefPMF,
    EffortCostParams,
    LearningParams,
    Scenario,
    SocialKind,
    SocialPrefParams,
    StressParams,
    effort_no_info,
    learning_effort,
    learning_posterior,
    learning_wtp,
    social_effort_exante,
    social_effort_expost,
    social_objective_expost,
    social_value_exante,
    social_wtp,
    stress_effort,
    stress_wtp,
    utility_no_info,
    value_no_info,
)
from peerinfo.oracle import UtilitySpec, oracle_maximize

__all__ = [
    "ClaimResult",
    "Combo",
    "GridConfig",
    "TheoryReport",
    "sample_grid",
    "verify_predictions",
]

MODELS = ("standard", "competitive", "inequality_averse", "stress", "learning")


@dataclass(frozen=True)
class Combo:
    """One parameter combination; ``params`` is None for the standard model."""

    effort: EffortCostParams
    beliefs: BeliefPMF
    params: SocialPrefParams | StressParams | LearningParams | None = None


@dataclass(frozen=True)
class GridConfig:
    n_per_model: int = 500
    seed: int = 0
    baseline_range: tuple[float, float] = (10.0, 30.0)
    wage_range: tuple[float, float] = (0.5, 2.0)
    max_support: int = 4
    support_max: float = 60.0
    cost_multipliers: tuple[float, ...] = (0.6, 0.7, 0.8, 0.9, 1.0, 1.15, 1.3, 1.45, 1.6)
    learning_draws: int = 33
    oracle: bool = True
    oracle_step: float = 1e-3

    def __post_init__(self) -> None:
        if self.n_per_model < 1:
            raise ValueError("grid must be nonempty")
        if list(self.cost_multipliers) != sorted(set(self.cost_multipliers)):
            raise ValueError("cost multipliers must be strictly increasing")


@dataclass
class ClaimResult:
    identifier: str
    tolerance: float
    grid_size: int = 0
    pass_count: int = 0
    max_violation: float = 0.0

    @property
    def passed(self) -> bool:
        return bool(self.max_violation <= self.tolerance)

    def record(self, violation: float) -> None:
        violation = float(violation)
        if math.isnan(violation):
            violation = math.inf
        self.grid_size += 1
        self.pass_count += int(violation <= self.tolerance)
        self.max_violation = max(self.max_violation, violation)

    def as_dict(self) -> dict:
        return {
            "id": self.identifier,
            "grid_size": self.grid_size,
            "pass_count": self.pass_count,
            "max_violation": self.max_violation if math.isfinite(self.max_violation) else None,
            "tolerance": self.tolerance,
            "passed": self.passed,
        }


@dataclass
class TheoryReport:
    claims: dict[str, ClaimResult] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.claims.values())

    def failures(self) -> list[ClaimResult]:
        return [c for c in self.claims.values() if not c.passed]

    def to_json(self) -> str:
        body = {"passed": self.passed, "claims": [self.claims[k].as_dict() for k in sorted(self.claims)]}
        return json.dumps(body, indent=2, sort_keys=True, allow_nan=False) + "\n"

    @classmethod
    def from_json(cls, text: str) -> TheoryReport:
        data = json.loads(text)
        report = cls()
        for row in data["claims"]:
            worst = math.inf if row["max_violation"] is None else row["max_violation"]
            c = ClaimResult(row["id"], row["tolerance"], row["grid_size"], row["pass_count"], worst)
            report.claims[c.identifier] = c
        return report


# --- sampling ---------------------------------------------------------------


def _beliefs(rng: np.random.Generator, cfg: GridConfig) -> BeliefPMF:
    # half-integer support keeps every kink of the comparison term on the oracle grid
    k = int(rng.integers(1, cfg.max_support + 1))
    halves = rng.choice(int(2 * cfg.support_max), size=k, replace=False) + 1
    support = np.sort(halves) / 2.0
    return BeliefPMF.from_weights(support, rng.dirichlet(np.ones(k)) + 1e-3)


def _effort(rng: np.random.Generator, cfg: GridConfig) -> EffortCostParams:
    w = float(rng.uniform(*cfg.wage_range))
    return EffortCostParams(w, w / float(rng.uniform(*cfg.baseline_range)))


def sample_grid(cfg: GridConfig) -> dict[str, list[Combo]]:
    """Deterministic pseudo-random parameter combinations for every model."""
    out = {}
    for m, model in enumerate(MODELS):
        rng = np.random.default_rng(np.random.SeedSequence(cfg.seed, spawn_key=(m,)))
        combos = []
        for _ in range(cfg.n_per_model):
            p, beliefs = _effort(rng, cfg), _beliefs(rng, cfg)
            params = None
            if model == "competitive":
                l2 = rng.uniform(0.05, 0.8)
                params = SocialPrefParams(l2 + rng.uniform(0.0, 0.8), l2, SocialKind.COMPETITIVE, rng.uniform(0.05, 1.0))
            elif model == "inequality_averse":
                l1 = rng.uniform(0.05, 0.9)
                l2 = -rng.uniform(0.02, 1.0) * min(l1, 0.95)
                params = SocialPrefParams(l1, l2, SocialKind.INEQUALITY_AVERSE, rng.uniform(0.0, 1.0))
            elif model == "stress":
                params = StressParams(rng.uniform(0.01, 1.0), rng.uniform(0.0, 1.0))
            elif model == "learning":
                lo, hi = rng.uniform(0.3, 0.9), rng.uniform(1.1, 2.0)
                params = LearningParams(
                    alpha_s=rng.uniform(lo, hi - 0.01),
                    alpha_lo=lo,
                    alpha_hi=hi,
                    search_cost=rng.uniform(0.0, 10.0),
                    grid_m=int(rng.integers(2, 61)),
                    kernel_sigma=rng.uniform(0.05, 0.5),
                    loc_a=rng.uniform(0.0, 1.0),
                    loc_b=rng.uniform(0.005, 0.05),
                )
            combos.append(Combo(p, beliefs, params))
        out[model] = combos
    return out


# --- claim helpers ----------------------------------------------------------


class _Checker:
    def __init__(self, tol: float, fd_tol: float):
        self.tol = tol
        self.fd_tol = fd_tol
        self.report = TheoryReport()

    def claim(self, identifier: str, tolerance: float | None = None) -> ClaimResult:
        if identifier not in self.report.claims:
            self.report.claims[identifier] = ClaimResult(identifier, self.tol if tolerance is None else tolerance)
        return self.report.claims[identifier]

    def geq(self, identifier: str, lhs: Iterable[float], rhs: Iterable[float], strict: bool = False) -> None:
        """Record ``lhs >= rhs`` (elementwise, worst case) for one combination."""
        margin = 2.0 * self.tol if strict else 0.0
        gaps = [r + margin - l for l, r in zip(lhs, rhs)]
        self.claim(identifier).record(max(0.0, max(gaps)))

    def close(self, identifier: str, a: Iterable[float], b: Iterable[float]) -> None:
        self.claim(identifier).record(max(abs(x - y) for x, y in zip(a, b)))

    def value(self, identifier: str, violation: float, tolerance: float | None = None) -> None:
        self.claim(identifier, tolerance).record(violation)


def _with_cost(p: EffortCostParams, m: float) -> EffortCostParams:
    return EffortCostParams(p.wage, p.cost * m)


def _with_delta(s: SocialPrefParams, delta: float) -> SocialPrefParams:
    return SocialPrefParams(s.lambda1, s.lambda2, s.kind, delta, validate=False)


def _single_peak_violation(values: Sequence[float]) -> float:
    j = int(np.argmax(values))
    worst = 0.0
    for k in range(len(values) - 1):
        step = values[k + 1] - values[k]
        worst = max(worst, -step if k < j else step)
    return worst


# --- per-model claims -------------------------------------------------------


def _check_standard(ck: _Checker, combos: Sequence[Combo]) -> None:
    zero = SocialPrefParams(0.0, 0.0, SocialKind.COMPETITIVE, 1.0, validate=False)
    for cb in combos:
        p, b = cb.effort, cb.beliefs
        base = effort_no_info(p)
        wtp = [social_wtp(p, zero, b, s) for s in (Scenario.EX_ANTE, Scenario.EX_POST)]
        ck.close("standard.wtp_zero", wtp, [0.0, 0.0])
        efforts = [social_effort_exante(p, zero, x) for x in b.support] + [social_effort_expost(p, zero, b)]
        ck.close("standard.effort_unchanged", efforts, [base] * len(efforts))


def _check_social(ck: _Checker, combos: Sequence[Combo], cfg: GridConfig, name: str) -> None:
    competitive = name == "competitive"
    for cb in combos:
        p, s, b = cb.effort, cb.params, cb.beliefs
        base = effort_no_info(p)
        s1 = _with_delta(s, 1.0)
        ante = [social_effort_exante(p, s, x) for x in b.support]
        post = social_effort_expost(p, s, b)
        wtp_ante = social_wtp(p, s, b, Scenario.EX_ANTE)
        curve = [social_wtp(_with_cost(p, m), s, b, Scenario.EX_ANTE) for m in cfg.cost_multipliers]
        ck.geq(f"{name}.expost_wtp_le_exante_at_unit_delta", [wtp_ante], [social_wtp(p, s1, b, Scenario.EX_POST)])
        if competitive:
            # cost multipliers increase, so baseline effort decreases along the curve
            ck.geq(f"{name}.exante_wtp_increasing_in_baseline", curve[:-1], curve[1:], strict=True)
            ck.geq(f"{name}.exante_effort_increases", ante, [base] * len(ante), strict=True)
            ck.geq(f"{name}.expost_effort_increases", [post], [base], strict=True)
        else:
            ck.geq(f"{name}.exante_wtp_nonpositive", [0.0], [wtp_ante])
            ck.value(f"{name}.exante_wtp_single_peaked_in_baseline", _single_peak_violation(curve[::-1]))
            ck.geq(
                f"{name}.exante_effort_bunches_toward_average",
                [abs(base - x) for x in b.support],
                [abs(e - x) for e, x in zip(ante, b.support)],
            )
            if s.delta <= 1.0:
                ck.geq(
                    f"{name}.expost_effort_farther_from_average",
                    [abs(post - x) for x in b.support],
                    [abs(e - x) for e, x in zip(ante, b.support)],
                )
        # closed-form indirect utility against the objective evaluated at the closed-form effort
        direct = [
            float(social_objective_expost(p, _with_delta(s, 1.0), BeliefPMF.point(x), e)) for e, x in zip(ante, b.support)
        ]
        ck.close(f"{name}.exante_value_closed_form", [social_value_exante(p, s, x) for x in b.support], direct)


def _check_stress(ck: _Checker, combos: Sequence[Combo], cfg: GridConfig) -> None:
    for cb in combos:
        p, st, b = cb.effort, cb.params, cb.beliefs
        base = effort_no_info(p)
        ante = stress_wtp(p, st, b, Scenario.EX_ANTE)
        post = stress_wtp(p, st, b, Scenario.EX_POST)
        # the same quantity through indirect utilities: E[U(e*) - stress] - V_no
        e_star = stress_effort(p, st, Scenario.EX_ANTE)
        via_values = b.expect(lambda x: float(utility_no_info(p, e_star)) - st.theta * x) - value_no_info(p)
        ck.close("stress.exante_wtp_formula", [ante, via_values], [-st.theta * b.mean(), -b.expect(st.stress)])
        ck.geq("stress.exante_wtp_negative", [0.0], [ante], strict=True)
        curve = [stress_wtp(_with_cost(p, m), st, b, Scenario.EX_ANTE) for m in cfg.cost_multipliers]
        ck.value("stress.exante_wtp_independent_of_baseline", max(curve) - min(curve))
        ck.geq("stress.expost_wtp_ge_exante", [post], [ante])
        efforts = [stress_effort(p, st, s) for s in Scenario]
        ck.close("stress.effort_unchanged", efforts, [base] * len(efforts))


def _check_learning(ck: _Checker, combos: Sequence[Combo], cfg: GridConfig, fd_step: float) -> None:
    draws = (np.arange(cfg.learning_draws) + 0.5) / cfg.learning_draws
    for cb in combos:
        p, l, b = cb.effort, cb.params, cb.beliefs
        base = effort_no_info(p, l.alpha_s)
        wtp = learning_wtp(p, l, b, Scenario.EX_ANTE)
        ck.geq("learning.exante_wtp_nonnegative", [wtp], [0.0])
        ck.close("learning.expost_wtp_zero", [learning_wtp(p, l, b, Scenario.EX_POST)], [0.0])

        def at(alpha_s: float) -> float:
            moved = LearningParams(alpha_s, l.alpha_lo, l.alpha_hi, l.search_cost, l.grid_m, l.kernel_sigma, l.loc_a, l.loc_b)
            return learning_wtp(p, moved, b, Scenario.EX_ANTE)

        alphas = np.linspace(l.alpha_lo, l.alpha_hi, 9)
        curve = [at(a) for a in alphas]
        ck.geq("learning.exante_wtp_decreasing_in_baseline", curve[:-1], curve[1:])
        slope = (at(l.alpha_s + fd_step) - wtp) / fd_step
        ck.value("learning.exante_wtp_derivative_nonpositive", max(0.0, slope), ck.fd_tol)
        efforts = [learning_effort(p, l, Scenario.EX_ANTE, y_bar=y, draw=float(d))[0] for y in b.support for d in draws]
        ck.geq("learning.exante_effort_weakly_increases", efforts, [base] * len(efforts))
        others = [learning_effort(p, l, s)[0] for s in (Scenario.EX_POST, Scenario.NO_INFO)]
        ck.close("learning.expost_effort_unchanged", others, [base, base])
        # consecutive support points, plus one step above the top so point masses are covered too
        cdfs = [learning_posterior(l, y).cdf() for y in (*b.support, b.support[-1] + 5.0)]
        ck.geq("learning.posterior_fosd_in_average", np.concatenate(cdfs[:-1]), np.concatenate(cdfs[1:]))


# --- oracle equivalence -----------------------------------------------------


def _oracle_pair(
    ck: _Checker, name: str, spec: UtilitySpec, hi: float, effort: float, value: float, step: float, scale: float
) -> None:
    arg, best = oracle_maximize(spec, 0.0, hi, step)
    ck.value(f"oracle.{name}.argmax_steps", abs(arg - effort) / step, 2.0)
    ck.value(f"oracle.{name}.value_relative", abs(best - value) / scale, 1e-8)


def _upper(*efforts: float) -> float:
    return float(math.ceil(1.25 * max(efforts) + 1.0))


def _check_oracle(ck: _Checker, grid: dict[str, list[Combo]], step: float, draw: float = 0.999) -> None:
    for cb in grid.get("standard", []):
        p = cb.effort
        v0 = value_no_info(p)
        spec = UtilitySpec("standard", Scenario.NO_INFO, p)
        _oracle_pair(ck, "standard", spec, _upper(p.baseline_effort), effort_no_info(p), v0, step, v0)
    for name in ("competitive", "inequality_averse"):
        for cb in grid.get(name, []):
            p, s, b = cb.effort, cb.params, cb.beliefs
            v0 = value_no_info(p)
            hi = _upper(p.wage * (1 + max(s.lambda1, 0.0)) / p.cost, p.baseline_effort, b.support[-1])
            for x in b.support:
                v = social_value_exante(p, s, x)
                spec = UtilitySpec("social", Scenario.EX_ANTE, p, s, x)
                _oracle_pair(ck, f"{name}.exante", spec, hi, social_effort_exante(p, s, x), v, step, max(abs(v), v0))
            e = social_effort_expost(p, s, b)
            v = float(social_objective_expost(p, s, b, e))
            spec = UtilitySpec("social", Scenario.EX_POST, p, s, b)
            _oracle_pair(ck, f"{name}.expost", spec, hi, e, v, step, max(abs(v), v0))
    for cb in grid.get("stress", []):
        p, st, b = cb.effort, cb.params, cb.beliefs
        v0 = value_no_info(p)
        hi = _upper(p.baseline_effort)
        for scenario, cond in ((Scenario.EX_ANTE, b.support[-1]), (Scenario.EX_POST, b)):
            v = v0 + stress_wtp(p, st, BeliefPMF.point(cond) if scenario is Scenario.EX_ANTE else b, scenario)
            spec = UtilitySpec("stress", scenario, p, st, cond)
            _oracle_pair(ck, f"stress.{scenario.value}", spec, hi, stress_effort(p, st, scenario), v, step, max(abs(v), v0))
    for cb in grid.get("learning", []):
        p, l, b = cb.effort, cb.params, cb.beliefs
        effort, alpha = learning_effort(p, l, Scenario.EX_ANTE, y_bar=b.support[-1], draw=draw)
        v = value_no_info(p, alpha)
        spec = UtilitySpec("learning", Scenario.NO_INFO, p, alpha=alpha)
        _oracle_pair(ck, "learning.exante", spec, _upper(effort), effort, v, step, v)


def verify_predictions(
    cfg: GridConfig | None = None,
    tol: float = 1e-7,
    fd_tol: float = 1e-4,
    fd_step: float = 1e-5,
    grid: dict[str, list[Combo]] | None = None,
) -> TheoryReport:
    """Evaluate every claim over ``grid`` (sampled from ``cfg`` when not given).

    Violations are reported, never raised. Pass an explicit ``grid`` to check
    hand-built or deliberately inconsistent parameters.
    """
    cfg = cfg or GridConfig()
    if not tol > 0:
        raise ValueError("tol must be > 0")
    grid = sample_grid(cfg) if grid is None else grid
    ck = _Checker(tol, fd_tol)
    _check_standard(ck, grid.get("standard", []))
    for name in ("competitive", "inequality_averse"):
        _check_social(ck, grid.get(name, []), cfg, name)
    _check_stress(ck, grid.get("stress", []), cfg)
    _check_learning(ck, grid.get("learning", []), cfg, fd_step)
    if cfg.oracle:
        _check_oracle(ck, grid, cfg.oracle_step)
    return ck.report

