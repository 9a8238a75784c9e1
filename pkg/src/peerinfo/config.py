"""YAML run configuration shared by all subcommands.

Every random choice derives from the single top-level ``seed``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Mapping

import yaml

from peerinfo.classifier import ClassifierConfig, WorkerType
from peerinfo.elicitation import PerformanceBin
from peerinfo.models import Scenario
from peerinfo.rng import check_seed
from peerinfo.simulator import PopulationConfig
from peerinfo.verify import GridConfig
from peerinfo.welfare import Policy

__all__ = ["ClusteringConfig", "ConfigError", "RunConfig", "VerifyConfig"]


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ClusteringConfig:
    k_min: int = 2
    k_max: int = 8
    restarts: int = 10
    max_iter: int = 300
    tol: float = 1e-6
    normalize: bool = False


@dataclass(frozen=True)
class VerifyConfig:
    grid: GridConfig = field(default_factory=GridConfig)
    tol: float = 1e-7
    fd_tol: float = 1e-4
    fd_step: float = 1e-5


@dataclass(frozen=True)
class RunConfig:
    seed: int = 0
    population: PopulationConfig = field(default_factory=PopulationConfig)
    classifier: ClassifierConfig = field(default_factory=ClassifierConfig)
    clustering: ClusteringConfig = field(default_factory=ClusteringConfig)
    targeted: Policy = field(default_factory=Policy.targeted)
    verify: VerifyConfig = field(default_factory=VerifyConfig)

    def with_seed(self, seed: int) -> RunConfig:
        seed = check_seed(seed)
        grid = replace(self.verify.grid, seed=seed)
        return replace(self, seed=seed, population=replace(self.population, seed=seed), verify=replace(self.verify, grid=grid))

    @classmethod
    def from_dict(cls, data: Mapping[str, Any] | None) -> RunConfig:
        data = dict(data or {})
        known = {"seed", "population", "classifier", "clustering", "welfare", "verify"}
        extra = set(data) - known
        if extra:
            raise ConfigError(f"unknown config sections: {sorted(extra)}")
        try:
            seed = check_seed(data.get("seed", 0))
            pop = dict(data.get("population") or {})
            if "seed" in pop:
                raise ConfigError("set the seed at the top level, not inside population")
            population = PopulationConfig.from_dict({**pop, "seed": seed})
            cl = dict(data.get("classifier") or {})
            classifier = ClassifierConfig(
                tuple(PerformanceBin(int(b)) for b in cl.pop("probe_bins", (1, 5, 9))), int(cl.pop("epsilon", 0))
            )
            _no_extra("classifier", cl)
            clustering = ClusteringConfig(**dict(data.get("clustering") or {}))
            targeted = _targeted(dict(data.get("welfare") or {}))
            ver = dict(data.get("verify") or {})
            tols = {k: float(ver.pop(k)) for k in ("tol", "fd_tol", "fd_step") if k in ver}
            if "cost_multipliers" in ver:
                ver["cost_multipliers"] = tuple(ver["cost_multipliers"])
            for k in ("baseline_range", "wage_range"):
                if k in ver:
                    ver[k] = tuple(ver[k])
            verify = VerifyConfig(GridConfig(**ver, seed=seed), **tols)
        except ConfigError:
            raise
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc
        return cls(seed, population, classifier, clustering, targeted, verify)

    @classmethod
    def load(cls, path: str | Path) -> RunConfig:
        try:
            data = yaml.safe_load(Path(path).read_text(encoding="utf-8"))
        except yaml.YAMLError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
        if data is not None and not isinstance(data, dict):
            raise ConfigError(f"{path}: top level must be a mapping")
        try:
            return cls.from_dict(data)
        except ConfigError as exc:
            raise ConfigError(f"{path}: {exc}") from exc


def _no_extra(section: str, rest: Mapping) -> None:
    if rest:
        raise ConfigError(f"unknown {section} settings: {sorted(rest)}")


def _targeted(block: dict) -> Policy:
    mapping = block.pop("targeted", None)
    _no_extra("welfare", block)
    if mapping is None:
        return Policy.targeted()
    assignment = {}
    for t, s in mapping.items():
        assignment[WorkerType(int(t))] = None if s in (None, "none") else Scenario(s)
    return Policy.targeted(assignment)
