"""Strategy-method WTP elicitation, the BDM resolution rule and arm assignment."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import TYPE_CHECKING, Mapping, Sequence

import numpy as np

from peerinfo.models import (
    BeliefPMF,
    Scenario,
    learning_wtp,
    social_wtp,
    stress_wtp,
)

if TYPE_CHECKING:
    from peerinfo.simulator import AgentSpec

__all__ = [
    "ARM_PROBABILITIES",
    "BONUS_CENTS",
    "BdmOutcome",
    "PerformanceBin",
    "SCHEDULE_SCENARIOS",
    "TreatmentArm",
    "WtpSchedule",
    "assign_arm",
    "bdm_expected_payoff",
    "bdm_expected_payoff_table",
    "bdm_payoff",
    "bdm_resolve",
    "build_wtp_schedule",
    "realized_bin",
    "round_half_up",
    "signed_to_choice",
    "truncate_cents",
]

BONUS_CENTS = 50
SCHEDULE_SCENARIOS = (Scenario.EX_ANTE, Scenario.EX_POST)


class PerformanceBin(int, Enum):
    """Own Period-1 performance relative to the peer average, numbered 1..9 from the bottom."""

    BELOW_20_PLUS = 1
    BELOW_11_TO_20 = 2
    BELOW_6_TO_10 = 3
    BELOW_2_TO_5 = 4
    WITHIN_1 = 5
    ABOVE_2_TO_5 = 6
    ABOVE_6_TO_10 = 7
    ABOVE_11_TO_20 = 8
    ABOVE_20_PLUS = 9

    @property
    def offset(self) -> float:
        return DEFAULT_OFFSETS[self]

    @property
    def mirror(self) -> PerformanceBin:
        return PerformanceBin(10 - self.value)


DEFAULT_OFFSETS: Mapping[PerformanceBin, float] = dict(
    zip(PerformanceBin, (-25.0, -15.5, -8.0, -3.5, 0.0, 3.5, 8.0, 15.5, 25.0))
)


class TreatmentArm(str, Enum):
    CONTROL = "control"
    EX_ANTE_INFO = "exante_info"
    EX_POST_INFO = "expost_info"
    CHOOSE_YOUR_INFO = "choose_your_info"


ARM_PROBABILITIES: Mapping[TreatmentArm, float] = {
    TreatmentArm.CONTROL: 0.30,
    TreatmentArm.EX_ANTE_INFO: 0.30,
    TreatmentArm.EX_POST_INFO: 0.30,
    TreatmentArm.CHOOSE_YOUR_INFO: 0.10,
}
_ARM_CUTS = (0.3, 0.6, 0.9)


def round_half_up(x: float) -> int:
    return math.floor(x + 0.5)


def realized_bin(e1: int, e_bar_true: float) -> PerformanceBin:
    """Bin the whole-row gap between Period-1 effort and the (rounded) true average."""
    if e1 < 0 or e_bar_true < 0:
        raise ValueError(f"efforts must be nonnegative, got {e1}, {e_bar_true}")
    d = int(e1) - round_half_up(e_bar_true)
    size = abs(d)
    if size <= 1:
        return PerformanceBin.WITHIN_1
    # 20 belongs to the 11-20 bin; 21 and beyond are 20+
    steps = 1 if size <= 5 else 2 if size <= 10 else 3 if size <= 20 else 4
    return PerformanceBin(5 + steps if d > 0 else 5 - steps)


def truncate_cents(x: float) -> int:
    """Round toward zero to whole cents and clamp to the bonus range.

    A 1e-9 cent guard keeps values such as 0.9999999999 (float noise on an exact 1)
    from collapsing to 0.
    """
    guarded = x + math.copysign(1e-9, x)
    return max(-BONUS_CENTS, min(BONUS_CENTS, int(math.trunc(guarded))))


def signed_to_choice(signed: int) -> tuple[bool, int]:
    """Split a signed WTP into ``(prefer_info, wtp_cents)``; zero maps to preferring info."""
    return signed >= 0, abs(int(signed))


@dataclass(frozen=True)
class WtpSchedule:
    """Receive/avoid choice and cents offered, per scenario and performance bin.

    ``prefer`` and ``cents`` map ``(Scenario, PerformanceBin)`` to the
    worker's binary choice and WTP in ``[0, 50]``.
    """

    prefer: Mapping[tuple[Scenario, PerformanceBin], bool]
    cents: Mapping[tuple[Scenario, PerformanceBin], int]
    worker_id: str = ""

    def __post_init__(self) -> None:
        keys = {(s, b) for s in SCHEDULE_SCENARIOS for b in PerformanceBin}
        if set(self.prefer) != keys or set(self.cents) != keys:
            missing = sorted((s.value, b.value) for s, b in keys - (set(self.prefer) & set(self.cents)))
            raise ValueError(f"incomplete schedule for worker {self.worker_id!r}: missing {missing}")
        for key, v in self.cents.items():
            if int(v) != v or not 0 <= v <= BONUS_CENTS:
                raise ValueError(f"wtp_cents {v!r} at {key[0].value}/bin {key[1].value} outside [0, {BONUS_CENTS}]")

    @classmethod
    def from_signed(cls, signed: Mapping[tuple[Scenario, PerformanceBin], int], worker_id: str = "") -> WtpSchedule:
        prefer, cents = {}, {}
        for key, v in signed.items():
            prefer[key], cents[key] = signed_to_choice(v)
        return cls(prefer, cents, worker_id)

    @classmethod
    def from_array(cls, row: Sequence[int], worker_id: str = "") -> WtpSchedule:
        """Inverse of :meth:`to_array` (ex ante bins 1..9, then ex post bins 1..9)."""
        if len(row) != 18:
            raise ValueError(f"expected 18 signed entries, got {len(row)}")
        signed = {(s, b): int(row[9 * i + b.value - 1]) for i, s in enumerate(SCHEDULE_SCENARIOS) for b in PerformanceBin}
        return cls.from_signed(signed, worker_id)

    def signed(self, scenario: Scenario, b: PerformanceBin) -> int:
        key = (Scenario(scenario), PerformanceBin(b))
        return self.cents[key] if self.prefer[key] else -self.cents[key]

    def profile(self, scenario: Scenario) -> list[int]:
        return [self.signed(scenario, b) for b in PerformanceBin]

    def to_array(self) -> np.ndarray:
        return np.array(self.profile(Scenario.EX_ANTE) + self.profile(Scenario.EX_POST), dtype=int)


def _agent_wtp(agent: AgentSpec, beliefs: BeliefPMF, scenario: Scenario) -> float:
    kind = agent.model
    if kind == "standard":
        return 0.0
    if kind in ("competitive", "inequality_averse"):
        return social_wtp(agent.effort, agent.params, beliefs, scenario)
    if kind == "stress":
        return stress_wtp(agent.effort, agent.params, beliefs, scenario)
    return learning_wtp(agent.effort, agent.params, beliefs, scenario)


def build_wtp_schedule(
    agent: AgentSpec,
    baseline: float | None = None,
    offsets: Mapping[PerformanceBin, float] | None = None,
) -> WtpSchedule:
    """Truthful contingent WTP for every scenario and bin.

    A bin says where the worker's own performance sits relative to the
    average, so the implied average is ``baseline - offset`` (floored at 0) and
    the worker's conditional belief is a point mass there. ``baseline``
    defaults to the agent's no-information effort.
    """
    offsets = DEFAULT_OFFSETS if offsets is None else offsets
    base = agent.no_info_effort if baseline is None else float(baseline)
    signed = {}
    for b in PerformanceBin:
        beliefs = BeliefPMF.point(max(0.0, base - offsets[b]))
        for s in SCHEDULE_SCENARIOS:
            signed[(s, b)] = truncate_cents(_agent_wtp(agent, beliefs, s) + agent.curiosity)
    return WtpSchedule.from_signed(signed, agent.worker_id)


@dataclass(frozen=True)
class BdmOutcome:
    implemented: bool
    payment_cents: int
    receives_info: bool
    final_bonus_cents: int = field(init=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "final_bonus_cents", BONUS_CENTS - self.payment_cents)


def _check_cents(name: str, v: int) -> None:
    if int(v) != v or not 0 <= v <= BONUS_CENTS:
        raise ValueError(f"{name} must be an integer in [0, {BONUS_CENTS}], got {v!r}")


def bdm_resolve(prefer_info: bool, wtp_cents: int, coin_direct: bool, draw_cents: int) -> BdmOutcome:
    """Enact the matched question: the coin implements the choice for free, otherwise BDM at ``draw_cents``."""
    _check_cents("wtp_cents", wtp_cents)
    _check_cents("draw_cents", draw_cents)
    if coin_direct:
        return BdmOutcome(True, 0, bool(prefer_info))
    if draw_cents <= wtp_cents:
        return BdmOutcome(True, int(draw_cents), bool(prefer_info))
    return BdmOutcome(False, 0, not prefer_info)


def bdm_payoff(value_cents: float, reported_signed: int, coin_direct: bool, draw_cents: int) -> float:
    """Bonus kept plus the worker's value of the information outcome."""
    prefer, cents = signed_to_choice(reported_signed)
    out = bdm_resolve(prefer, cents, coin_direct, draw_cents)
    return out.final_bonus_cents + (value_cents if out.receives_info else 0.0)


def bdm_expected_payoff(value_cents: float, reported_signed: int) -> float:
    """Expectation over a fair direct-implementation coin and a uniform draw on 0..50."""
    draws = range(BONUS_CENTS + 1)
    bdm = math.fsum(bdm_payoff(value_cents, reported_signed, False, d) for d in draws) / len(draws)
    return 0.5 * bdm_payoff(value_cents, reported_signed, True, 0) + 0.5 * bdm


def bdm_expected_payoff_table() -> np.ndarray:
    """Expected payoff for every (true value, signed report) pair on the whole-cent grid.

    Entry ``[i, j]`` is :func:`bdm_expected_payoff` at value ``i - 50`` and
    report ``j - 50``, computed in one vectorised pass.
    """
    grid = np.arange(-BONUS_CENTS, BONUS_CENTS + 1)
    v = grid[:, None, None].astype(float)
    r = grid[None, :, None]
    d = np.arange(BONUS_CENTS + 1)[None, None, :]
    prefer = r >= 0
    bought = d <= np.abs(r)
    gets_info = np.where(bought, prefer, ~prefer)
    bdm = BONUS_CENTS - np.where(bought, d, 0) + np.where(gets_info, v, 0.0)
    direct = BONUS_CENTS + np.where(prefer[..., 0], v[..., 0], 0.0)
    return 0.5 * direct + 0.5 * bdm.mean(axis=2)


def assign_arm(u: float) -> TreatmentArm:
    if not 0.0 <= u < 1.0:
        raise ValueError(f"u must lie in [0, 1), got {u}")
    if u < _ARM_CUTS[0]:
        return TreatmentArm.CONTROL
    if u < _ARM_CUTS[1]:
        return TreatmentArm.EX_ANTE_INFO
    if u < _ARM_CUTS[2]:
        return TreatmentArm.EX_POST_INFO
    return TreatmentArm.CHOOSE_YOUR_INFO
