"""Synthetic worker populations run through the two-period experiment.

The flow follows the lab protocol: a Period-1 baseline, contingent WTP for
all nine bins, random arm assignment (BDM for the Choose-Your-Info arm) and
a Period-2 effort that depends on the arm. Treatment effects are plain
differences in mean effort change against Control.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

from peerinfo.classifier import ClassifierConfig, WorkerType, classify
from peerinfo.elicitation import (
    BONUS_CENTS,
    BdmOutcome,
    PerformanceBin,
    TreatmentArm,
    WtpSchedule,
    assign_arm,
    bdm_resolve,
    build_wtp_schedule,
    realized_bin,
    round_half_up,
)
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
    social_effort_exante,
    social_effort_expost,
)
from peerinfo.rng import check_seed, substream

__all__ = [
    "AgentSpec",
    "EffectRow",
    "EffectTable",
    "MODEL_KINDS",
    "PopulationConfig",
    "WorkerRecord",
    "belief_bin_pmf",
    "estimate_effects",
    "expected_type",
    "run_experiment",
    "simulate_population",
]

MODEL_KINDS = ("standard", "stress", "competitive", "inequality_averse", "learning")

# representative averages for the eight prior-belief ranges 0-10, 11-20, ..., 61-70, 70+
BELIEF_BIN_POINTS = (5.0, 15.5, 25.5, 35.5, 45.5, 55.5, 65.5, 75.0)

_EXPECTED_TYPE = {
    "standard": WorkerType.INDIFFERENT,
    "stress": WorkerType.STRESS_AVOIDANT,
    "inequality_averse": WorkerType.STRESS_AVOIDANT,
    "competitive": WorkerType.COMPETITIVE,
    "learning": WorkerType.LEARNING_RESIDUAL,
}


def expected_type(model: str) -> WorkerType:
    """Type a noiseless agent of this model should be classified as."""
    return _EXPECTED_TYPE[model]


@dataclass(frozen=True)
class AgentSpec:
    worker_id: str
    effort: EffortCostParams
    params: SocialPrefParams | StressParams | LearningParams | None = None
    curiosity: float = 0.0
    effort_noise: float = 0.0

    def __post_init__(self) -> None:
        if self.curiosity < 0 or self.effort_noise < 0:
            raise ValueError("curiosity and effort_noise must be >= 0")

    @property
    def model(self) -> str:
        if self.params is None:
            return "standard"
        if isinstance(self.params, SocialPrefParams):
            return self.params.kind.value
        return "stress" if isinstance(self.params, StressParams) else "learning"

    @property
    def no_info_effort(self) -> float:
        alpha = self.params.alpha_s if isinstance(self.params, LearningParams) else 1.0
        return effort_no_info(self.effort, alpha)

    def effort_for(self, scenario: Scenario, e_bar: float, beliefs: BeliefPMF, draw: float) -> float:
        """Optimal effort when told ``e_bar`` ex ante or holding ``beliefs`` ex post."""
        scenario = Scenario(scenario)
        p = self.params
        if scenario is Scenario.NO_INFO or p is None or isinstance(p, StressParams):
            return self.no_info_effort
        if isinstance(p, SocialPrefParams):
            if scenario is Scenario.EX_ANTE:
                return social_effort_exante(self.effort, p, e_bar)
            return social_effort_expost(self.effort, p, beliefs)
        return learning_effort(self.effort, p, scenario, y_bar=e_bar, draw=draw)[0]


@dataclass(frozen=True)
class WorkerRecord:
    worker_id: str
    model: str
    e1: int
    schedule: WtpSchedule
    bin: PerformanceBin
    type: WorkerType
    agent: AgentSpec | None = None
    arm: TreatmentArm | None = None
    e2: int | None = None
    cluster: int | None = None
    bdm_scenario: Scenario | None = None
    bdm_coin_direct: bool | None = None
    bdm_draw: int | None = None
    bdm: BdmOutcome | None = None


Range = Any  # a number or a [lo, hi] pair


def _default_ranges() -> dict[str, dict[str, Range]]:
    return {
        "competitive": {"lambda2": [0.3, 0.6], "lambda_gap": [0.0, 0.3], "delta": [0.3, 0.7]},
        "inequality_averse": {"lambda1": [0.2, 0.6], "lambda2": [-0.2, -0.05], "delta": [0.3, 0.7]},
        "stress": {"theta": [0.05, 0.25], "delta": [0.0, 0.05]},
        "learning": {
            "alpha_s": 1.0,
            "alpha_lo": 0.5,
            "alpha_hi": 1.5,
            "search_cost": [0.5, 2.0],
            "grid_m": 41,
            "kernel_sigma": 0.15,
            "loc_a": 0.5,
            "loc_b": 0.02,
        },
        "curiosity": {kind: 0.0 for kind in MODEL_KINDS},
    }


def _default_mixture() -> dict[str, float]:
    return {"standard": 0.32, "stress": 0.15, "competitive": 0.23, "learning": 0.30}


@dataclass(frozen=True)
class PopulationConfig:
    """Population mixture and per-model parameter ranges (each drawn uniformly).

    ``allocation="exact"`` fixes model counts by largest-remainder rounding of
    ``n * mixture`` and shuffles them; ``"sample"`` draws each worker's model
    independently. ``beliefs`` is ``"point_mass"`` (agents know the true
    average) or ``"belief_bins"`` (a pmf over the eight prior-belief ranges,
    Gaussian-weighted around the truth with sd ``belief_spread``).
    """

    n: int = 1000
    mixture: Mapping[str, float] = field(default_factory=_default_mixture)
    e_bar_true: float = 27.0
    seed: int = 0
    wage: float = 1.0
    cost: Range = (0.025, 0.06)
    effort_noise: float = 0.0
    period_drift: float = 0.0
    allocation: str = "exact"
    beliefs: str = "point_mass"
    belief_spread: float = 10.0
    ranges: Mapping[str, Mapping[str, Range]] = field(default_factory=_default_ranges)

    def __post_init__(self) -> None:
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"n must be a positive integer, got {self.n!r}")
        unknown = set(self.mixture) - set(MODEL_KINDS)
        if unknown:
            raise ValueError(f"unknown model kinds in mixture: {sorted(unknown)}")
        weights = list(self.mixture.values())
        if any(w < 0 for w in weights) or abs(math.fsum(weights) - 1.0) > 1e-9:
            raise ValueError(f"mixture weights must be nonnegative and sum to 1, got {dict(self.mixture)}")
        if self.allocation not in ("exact", "sample"):
            raise ValueError(f"allocation must be 'exact' or 'sample', got {self.allocation!r}")
        if self.beliefs not in ("point_mass", "belief_bins"):
            raise ValueError(f"beliefs must be 'point_mass' or 'belief_bins', got {self.beliefs!r}")
        if self.effort_noise < 0 or self.e_bar_true < 0:
            raise ValueError("effort_noise and e_bar_true must be >= 0")
        check_seed(self.seed)
        if not isinstance(self.cost, (int, float)):
            object.__setattr__(self, "cost", tuple(float(x) for x in self.cost))
        merged = _default_ranges()
        for kind, block in self.ranges.items():
            merged.setdefault(kind, {}).update(block)
        object.__setattr__(self, "ranges", merged)

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> PopulationConfig:
        known = set(cls.__dataclass_fields__)
        extra = set(data) - known
        if extra:
            raise ValueError(f"unknown population settings: {sorted(extra)}")
        return cls(**dict(data))

    def expost_beliefs(self) -> BeliefPMF:
        if self.beliefs == "point_mass":
            return BeliefPMF.point(self.e_bar_true)
        return belief_bin_pmf(self.e_bar_true, self.belief_spread)


def belief_bin_pmf(centre: float, spread: float) -> BeliefPMF:
    pts = np.asarray(BELIEF_BIN_POINTS)
    return BeliefPMF.from_weights(pts, np.exp(-np.square(pts - centre) / (2.0 * spread**2)))


def _uniform(rng: np.random.Generator, spec: Range) -> float:
    if isinstance(spec, (int, float)):
        return float(spec)
    lo, hi = spec
    return float(lo) if lo == hi else float(rng.uniform(lo, hi))


def _allocate(cfg: PopulationConfig) -> list[str]:
    kinds = [k for k in cfg.mixture if cfg.mixture[k] > 0]
    if cfg.allocation == "sample":
        out = []
        for i in range(cfg.n):
            u = substream(cfg.seed, "allocation", i).random()
            cum = np.cumsum([cfg.mixture[k] for k in kinds])
            out.append(kinds[min(int(np.searchsorted(cum, u, side="right")), len(kinds) - 1)])
        return out
    quotas = [cfg.n * cfg.mixture[k] for k in kinds]
    counts = [math.floor(q + 1e-9) for q in quotas]
    by_remainder = sorted(range(len(kinds)), key=lambda j: (-(quotas[j] - counts[j]), j))
    for j in by_remainder[: cfg.n - sum(counts)]:
        counts[j] += 1
    labels = [k for k, c in zip(kinds, counts) for _ in range(c)]
    order = substream(cfg.seed, "allocation", cfg.n).permutation(cfg.n)
    return [labels[j] for j in order]


def _draw_agent(cfg: PopulationConfig, kind: str, worker_id: str, rng: np.random.Generator) -> AgentSpec:
    r = cfg.ranges
    effort = EffortCostParams(cfg.wage, _uniform(rng, cfg.cost))
    params = None
    if kind == "competitive":
        b = r["competitive"]
        l2 = _uniform(rng, b["lambda2"])
        params = SocialPrefParams(l2 + _uniform(rng, b["lambda_gap"]), l2, SocialKind.COMPETITIVE, _uniform(rng, b["delta"]))
    elif kind == "inequality_averse":
        b = r["inequality_averse"]
        l1, l2 = _uniform(rng, b["lambda1"]), _uniform(rng, b["lambda2"])
        params = SocialPrefParams(l1, l2, SocialKind.INEQUALITY_AVERSE, _uniform(rng, b["delta"]))
    elif kind == "stress":
        b = r["stress"]
        params = StressParams(_uniform(rng, b["theta"]), _uniform(rng, b["delta"]))
    elif kind == "learning":
        b = r["learning"]
        params = LearningParams(
            alpha_s=_uniform(rng, b["alpha_s"]),
            alpha_lo=_uniform(rng, b["alpha_lo"]),
            alpha_hi=_uniform(rng, b["alpha_hi"]),
            search_cost=_uniform(rng, b["search_cost"]),
            grid_m=int(b["grid_m"]),
            kernel_sigma=_uniform(rng, b["kernel_sigma"]),
            loc_a=_uniform(rng, b["loc_a"]),
            loc_b=_uniform(rng, b["loc_b"]),
        )
    curiosity = _uniform(rng, r["curiosity"].get(kind, 0.0))
    return AgentSpec(worker_id, effort, params, curiosity, cfg.effort_noise)


def _realise(mean_effort: float, cfg: PopulationConfig, worker: int, period: int) -> int:
    noise = cfg.effort_noise * substream(cfg.seed, "noise", worker, period).standard_normal() if cfg.effort_noise else 0.0
    drift = cfg.period_drift * (period - 1)
    return max(0, round_half_up(mean_effort + drift + noise))


def simulate_population(cfg: PopulationConfig, classifier: ClassifierConfig | None = None) -> list[WorkerRecord]:
    """Draw agents, their Period-1 effort, contingent schedules, realised bins and types.

    Each schedule conditions on the worker's own Period-1 effort, so effort
    noise feeds through to the elicited profile.
    """
    classifier = classifier or ClassifierConfig()
    width = len(str(cfg.n))
    records = []
    for i, kind in enumerate(_allocate(cfg)):
        wid = f"w{i:0{width}d}"
        agent = _draw_agent(cfg, kind, wid, substream(cfg.seed, "population", i))
        e1 = _realise(agent.no_info_effort, cfg, i, 1)
        schedule = build_wtp_schedule(agent, baseline=e1)
        records.append(
            WorkerRecord(
                worker_id=wid,
                model=kind,
                e1=e1,
                schedule=schedule,
                bin=realized_bin(e1, cfg.e_bar_true),
                type=classify(schedule, classifier),
                agent=agent,
            )
        )
    return records


def run_experiment(records: Sequence[WorkerRecord], cfg: PopulationConfig) -> list[WorkerRecord]:
    """Assign arms, resolve BDM for Choose-Your-Info, and realise Period-2 effort.

    A Choose-Your-Info worker who ends up without information works as in Control.
    """
    beliefs = cfg.expost_beliefs()
    out = []
    for i, rec in enumerate(records):
        if rec.agent is None:
            raise ValueError(f"worker {rec.worker_id} has no agent spec; cannot simulate Period 2")
        agent = rec.agent
        arm = assign_arm(substream(cfg.seed, "assignment", i).random())
        learn_draw = substream(cfg.seed, "learning", i).random()
        scenario = {
            TreatmentArm.CONTROL: Scenario.NO_INFO,
            TreatmentArm.EX_ANTE_INFO: Scenario.EX_ANTE,
            TreatmentArm.EX_POST_INFO: Scenario.EX_POST,
        }.get(arm)
        bdm_fields: dict[str, Any] = {}
        if arm is TreatmentArm.CHOOSE_YOUR_INFO:
            rb = substream(cfg.seed, "bdm", i)
            counts = Scenario.EX_ANTE if rb.random() < 0.5 else Scenario.EX_POST
            coin = bool(rb.random() < 0.5)
            draw = int(rb.integers(0, BONUS_CENTS + 1))
            key = (counts, rec.bin)
            outcome = bdm_resolve(rec.schedule.prefer[key], rec.schedule.cents[key], coin, draw)
            scenario = counts if outcome.receives_info else Scenario.NO_INFO
            bdm_fields = dict(bdm_scenario=counts, bdm_coin_direct=coin, bdm_draw=draw, bdm=outcome)
        effort = agent.effort_for(scenario, cfg.e_bar_true, beliefs, learn_draw)
        out.append(replace(rec, arm=arm, e2=_realise(effort, cfg, i, 2), **bdm_fields))
    return out


@dataclass(frozen=True)
class EffectRow:
    subgroup: str
    arm: TreatmentArm
    effect: float | None
    se: float | None
    n_arm: int
    n_control: int
    control_mean_change: float | None


@dataclass(frozen=True)
class EffectTable:
    """Per-subgroup effects of each information arm on the Period-2 minus Period-1 effort change.

    ``sizes`` counts workers per subgroup and arm; Choose-Your-Info workers
    are counted there but excluded from every estimate.
    """

    grouping: str
    rows: tuple[EffectRow, ...]
    sizes: Mapping[str, Mapping[TreatmentArm, int]]

    def get(self, subgroup: str, arm: TreatmentArm) -> EffectRow:
        for row in self.rows:
            if row.subgroup == subgroup and row.arm is arm:
                return row
        raise KeyError((subgroup, arm))


def _subgroup_key(rec: WorkerRecord, grouping: str) -> str | None:
    if grouping == "all":
        return "all"
    if grouping == "type":
        return f"type{int(rec.type)}"
    if grouping == "cluster":
        return None if rec.cluster is None else f"cluster{rec.cluster}"
    raise ValueError(f"grouping must be 'all', 'type' or 'cluster', got {grouping!r}")


def _pooled_se(a: np.ndarray, b: np.ndarray) -> float | None:
    dof = len(a) + len(b) - 2
    if dof <= 0:
        return None
    ss = ((len(a) - 1) * a.var(ddof=1) if len(a) > 1 else 0.0) + ((len(b) - 1) * b.var(ddof=1) if len(b) > 1 else 0.0)
    return math.sqrt(ss / dof * (1.0 / len(a) + 1.0 / len(b)))


def estimate_effects(records: Iterable[WorkerRecord], grouping: str = "all") -> EffectTable:
    groups: dict[str, dict[TreatmentArm, list[int]]] = {}
    for rec in records:
        if rec.e2 is None or rec.arm is None:
            raise ValueError(f"worker {rec.worker_id} has no Period-2 outcome")
        key = _subgroup_key(rec, grouping)
        if key is None:
            continue
        groups.setdefault(key, {arm: [] for arm in TreatmentArm})[rec.arm].append(rec.e2 - rec.e1)
    rows, sizes = [], {}
    for key in sorted(groups):
        cells = {arm: np.asarray(v, dtype=float) for arm, v in groups[key].items()}
        sizes[key] = {arm: len(v) for arm, v in cells.items()}
        ctrl = cells[TreatmentArm.CONTROL]
        ctrl_mean = float(ctrl.mean()) if len(ctrl) else None
        for arm in (TreatmentArm.EX_ANTE_INFO, TreatmentArm.EX_POST_INFO):
            treated = cells[arm]
            if len(treated) and len(ctrl):
                effect, se = float(treated.mean()) - ctrl_mean, _pooled_se(treated, ctrl)
            else:
                effect, se = None, None
            rows.append(EffectRow(key, arm, effect, se, len(treated), len(ctrl), ctrl_mean))
    return EffectTable(grouping, tuple(rows), sizes)
