"""Realised worker payoffs under uniform and type-targeted information policies.

A worker's payoff from a policy is the signed WTP they stated for the
scenario the policy gives them, at the bin their Period-1 effort actually
fell in. Receiving no information is worth 0.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from peerinfo.classifier import WorkerType
from peerinfo.models import Scenario

__all__ = [
    "Policy",
    "PolicyOutcome",
    "UndefinedGainError",
    "best_targeted_policy",
    "evaluate_policy",
    "policy_report",
    "realized_payoff",
    "welfare_gain",
]

_ALLOWED = (Scenario.EX_ANTE, Scenario.EX_POST, None)


class UndefinedGainError(ArithmeticError):
    pass


@dataclass(frozen=True)
class Policy:
    """Which scenario (or none) each worker type is assigned."""

    name: str
    assignment: Mapping[WorkerType, Scenario | None]

    def __post_init__(self) -> None:
        clean = {}
        for t, s in self.assignment.items():
            s = None if s is None else Scenario(s)
            if s not in _ALLOWED:
                raise ValueError(f"policy {self.name!r} assigns {s.value!r}; only exante, expost or none are allowed")
            clean[WorkerType(t)] = s
        missing = set(WorkerType) - set(clean)
        if missing:
            raise ValueError(f"policy {self.name!r} does not cover types {sorted(int(t) for t in missing)}")
        object.__setattr__(self, "assignment", clean)

    @classmethod
    def uniform(cls, scenario: Scenario | None, name: str | None = None) -> Policy:
        label = "none" if scenario is None else Scenario(scenario).value
        return cls(name or f"uniform_{label}", {t: scenario for t in WorkerType})

    @classmethod
    def uniform_exante(cls) -> Policy:
        return cls.uniform(Scenario.EX_ANTE)

    @classmethod
    def uniform_expost(cls) -> Policy:
        return cls.uniform(Scenario.EX_POST)

    @classmethod
    def targeted(cls, assignment: Mapping[WorkerType, Scenario | None] | None = None, name: str = "targeted") -> Policy:
        """Defaults to ex post for stress-avoidant workers and ex ante for everyone else."""
        if assignment is None:
            assignment = {t: Scenario.EX_ANTE for t in WorkerType}
            assignment[WorkerType.STRESS_AVOIDANT] = Scenario.EX_POST
        return cls(name, assignment)


@dataclass(frozen=True)
class PolicyOutcome:
    policy: str
    mean: float
    type_means: Mapping[WorkerType, float | None]
    type_counts: Mapping[WorkerType, int]

    @property
    def n(self) -> int:
        return sum(self.type_counts.values())


def realized_payoff(record, assigned: Scenario | None) -> int:
    """Signed WTP at the record's realised bin for the assigned scenario; 0 without information."""
    if assigned is None:
        return 0
    return record.schedule.signed(Scenario(assigned), record.bin)


def evaluate_policy(records: Iterable, policy: Policy) -> PolicyOutcome:
    sums: dict[WorkerType, list[int]] = {t: [] for t in WorkerType}
    for rec in records:
        t = WorkerType(rec.type)
        sums[t].append(realized_payoff(rec, policy.assignment[t]))
    counts = {t: len(v) for t, v in sums.items()}
    n = sum(counts.values())
    if n == 0:
        raise ValueError("evaluate_policy needs at least one worker")
    # payoffs are integers, so these sums are exact and the aggregation identity holds
    total = sum(sum(v) for v in sums.values())
    type_means = {t: (sum(v) / len(v) if v else None) for t, v in sums.items()}
    return PolicyOutcome(policy.name, total / n, type_means, counts)


def welfare_gain(target: PolicyOutcome, baseline: PolicyOutcome) -> float:
    """Percent change of the target's mean payoff relative to a positive baseline mean."""
    if not baseline.mean > 0:
        raise UndefinedGainError(f"gain relative to {baseline.policy!r} is undefined: baseline mean is {baseline.mean}")
    return 100.0 * (target.mean - baseline.mean) / baseline.mean


def best_targeted_policy(
    records: Sequence,
    options: Sequence[Scenario | None] = (Scenario.EX_ANTE, Scenario.EX_POST),
    name: str = "targeted_best",
) -> Policy:
    """Give each type whichever option has the highest mean payoff for that type (earlier options win ties).

    Types absent from ``records`` get the first option.
    """
    choice = {}
    outcomes = [evaluate_policy(records, Policy.uniform(o)) for o in options]
    for t in WorkerType:
        scores = [o.type_means[t] for o in outcomes]
        if scores[0] is None:
            choice[t] = options[0]
            continue
        choice[t] = options[max(range(len(options)), key=lambda j: (scores[j], -j))]
    return Policy(name, choice)


def policy_report(records: Sequence, policies: Sequence[Policy]) -> list[dict]:
    """One row per policy: mean, per-type means and counts, and percent gains against both uniform baselines.

    Gains that are undefined (non-positive baseline) are reported as ``None``.
    """
    baselines = {
        "exante": evaluate_policy(records, Policy.uniform_exante()),
        "expost": evaluate_policy(records, Policy.uniform_expost()),
    }
    rows = []
    for policy in policies:
        out = evaluate_policy(records, policy)
        row = {"policy": out.policy, "mean": out.mean, "n": out.n}
        for t in WorkerType:
            row[f"type{int(t)}_mean"] = out.type_means[t]
            row[f"type{int(t)}_n"] = out.type_counts[t]
        for label, base in baselines.items():
            try:
                row[f"gain_vs_uniform_{label}"] = welfare_gain(out, base)
            except UndefinedGainError:
                row[f"gain_vs_uniform_{label}"] = None
        rows.append(row)
    return rows

