"""Brute-force grid maximiser used to cross-check the closed forms and solvers.

Utilities here are written out from their definitions on purpose; nothing is
shared with :mod:`peerinfo.models` beyond the parameter containers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from peerinfo.models import (
    BeliefPMF,
    EffortCostParams,
    Scenario,
    SocialPrefParams,
    StressParams,
)

__all__ = ["NonFiniteUtilityError", "UtilitySpec", "oracle_maximize"]

MAX_GRID_INTERVALS = 10**8
_CHUNK = 1 << 20


class NonFiniteUtilityError(ArithmeticError):
    pass


Conditioning = Union[float, BeliefPMF, None]


@dataclass(frozen=True)
class UtilitySpec:
    """A utility-of-effort closure: model tag, scenario, parameters and conditioning value.

    ``conditioning`` is the observed average for ex ante social/stress
    utilities and a belief pmf ex post. ``alpha`` is the productivity of the
    strategy in use (learning model); it is 1 elsewhere.
    """

    model: str
    scenario: Scenario
    effort: EffortCostParams
    params: SocialPrefParams | StressParams | None = None
    conditioning: Conditioning = None
    alpha: float = 1.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "scenario", Scenario(self.scenario))
        expected = {"standard": type(None), "learning": type(None), "social": SocialPrefParams, "stress": StressParams}
        if self.model not in expected:
            raise ValueError(f"unknown model tag {self.model!r}")
        if not isinstance(self.params, expected[self.model]):
            raise TypeError(f"{self.model} utility takes {expected[self.model].__name__} parameters")
        if self.model in ("social", "stress") and self.scenario is not Scenario.NO_INFO:
            want = float if self.scenario is Scenario.EX_ANTE else BeliefPMF
            if want is float and isinstance(self.conditioning, (int, float)):
                return
            if not isinstance(self.conditioning, want):
                raise TypeError(f"{self.scenario.value} {self.model} utility needs a {want.__name__} conditioning value")

    def __call__(self, e: np.ndarray) -> np.ndarray:
        w, c = self.effort.wage, self.effort.cost
        base = w * self.alpha * e - 0.5 * c * e * e
        if self.model in ("standard", "learning") or self.scenario is Scenario.NO_INFO:
            return base
        if self.model == "stress":
            st = self.params
            if self.scenario is Scenario.EX_ANTE:
                return base - st.theta * float(self.conditioning)
            pmf = self.conditioning
            return base - st.delta * sum(q * st.theta * x for x, q in zip(pmf.support, pmf.probs))
        s = self.params
        if self.scenario is Scenario.EX_ANTE:
            return base + _comparison(w * e - w * float(self.conditioning), s.lambda1, s.lambda2)
        total = np.zeros_like(e)
        for x, q in zip(self.conditioning.support, self.conditioning.probs):
            total += q * _comparison(w * e - w * x, s.lambda1, s.lambda2)
        return base + s.delta * total


def _comparison(x: np.ndarray, l1: float, l2: float) -> np.ndarray:
    return np.where(x <= 0, l1 * x, l2 * x)


def oracle_maximize(u: UtilitySpec, lo: float, hi: float, step: float) -> tuple[float, float]:
    """Evaluate ``u`` on ``lo, lo+step, ..., hi``; return the first argmax and its value."""
    if not lo < hi:
        raise ValueError(f"need lo < hi, got {lo}, {hi}")
    if not step > 0:
        raise ValueError(f"step must be > 0, got {step}")
    intervals = math.floor((hi - lo) / step + 1e-9)
    if intervals > MAX_GRID_INTERVALS:
        raise ValueError(f"grid has {intervals} intervals, limit is {MAX_GRID_INTERVALS}")
    best_i, best_v = -1, -math.inf
    for start in range(0, intervals + 1, _CHUNK):
        idx = np.arange(start, min(start + _CHUNK, intervals + 1))
        vals = np.asarray(u(lo + step * idx), dtype=float)
        if not np.all(np.isfinite(vals)):
            bad = idx[~np.isfinite(vals)][0]
            raise NonFiniteUtilityError(f"utility is not finite at e={lo + step * bad!r}")
        j = int(np.argmax(vals))
        if vals[j] > best_v:
            best_i, best_v = int(idx[j]), float(vals[j])
    return lo + step * best_i, best_v
