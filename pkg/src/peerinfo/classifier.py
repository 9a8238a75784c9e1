"""Theory-driven worker typing from ex ante WTP at three probe bins."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from enum import IntEnum
from typing import Iterable, Sequence

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_array

from peerinfo.elicitation import PerformanceBin, WtpSchedule
from peerinfo.models import Scenario

__all__ = ["ClassifierConfig", "ProfileTypeClassifier", "WorkerType", "classify", "classify_triple", "type_shares"]


class WorkerType(IntEnum):
    INDIFFERENT = 1
    STRESS_AVOIDANT = 2
    COMPETITIVE = 3
    LEARNING_RESIDUAL = 4


@dataclass(frozen=True)
class ClassifierConfig:
    probe_bins: tuple[PerformanceBin, PerformanceBin, PerformanceBin] = (
        PerformanceBin.BELOW_20_PLUS,
        PerformanceBin.WITHIN_1,
        PerformanceBin.ABOVE_20_PLUS,
    )
    epsilon: int = 0

    def __post_init__(self) -> None:
        bins = tuple(PerformanceBin(b) for b in self.probe_bins)
        if len(bins) != 3 or not bins[0] < bins[1] < bins[2]:
            raise ValueError(f"probe bins must be three strictly increasing bins, got {self.probe_bins}")
        if self.epsilon < 0:
            raise ValueError(f"epsilon must be >= 0, got {self.epsilon}")
        object.__setattr__(self, "probe_bins", bins)


def classify_triple(a: float, b: float, c: float, epsilon: float = 0) -> WorkerType:
    """Type of a bottom/middle/top ex ante WTP triple; first matching rule wins."""
    a, b, c = (0 if abs(x) <= epsilon else x for x in (a, b, c))
    if a == b == c == 0:
        return WorkerType.INDIFFERENT
    if max(a, b, c) <= 0:
        # min < 0 holds here since not all are zero
        return WorkerType.STRESS_AVOIDANT
    if a <= b <= c and (a < b or b < c):
        return WorkerType.COMPETITIVE
    return WorkerType.LEARNING_RESIDUAL


def classify(schedule: WtpSchedule, cfg: ClassifierConfig | None = None) -> WorkerType:
    cfg = cfg or ClassifierConfig()
    a, b, c = (schedule.signed(Scenario.EX_ANTE, bin_) for bin_ in cfg.probe_bins)
    return classify_triple(a, b, c, cfg.epsilon)


def type_shares(types: Iterable[WorkerType | int]) -> dict[WorkerType, float]:
    """Fraction of workers per type. Accepts types or records carrying a ``type`` attribute."""
    counts = Counter(WorkerType(getattr(t, "type", t)) for t in types)
    n = sum(counts.values())
    if n == 0:
        raise ValueError("type_shares needs at least one worker")
    return {t: counts[t] / n for t in WorkerType}


class ProfileTypeClassifier(ClassifierMixin, BaseEstimator):
    """Rule-based typing with the scikit-learn estimator surface.

    ``X`` rows are signed schedules as produced by :meth:`WtpSchedule.to_array`
    (18 columns) or just the nine ex ante entries. Nothing is learned, so
    ``fit`` only validates and records the classes.
    """

    def __init__(self, probe_bins: Sequence[int] = (1, 5, 9), epsilon: int = 0):
        self.probe_bins = probe_bins
        self.epsilon = epsilon

    def _config(self) -> ClassifierConfig:
        return ClassifierConfig(tuple(PerformanceBin(b) for b in self.probe_bins), self.epsilon)

    def _validate(self, X) -> np.ndarray:
        X = check_array(X, dtype=float)
        if X.shape[1] not in (9, 18):
            raise ValueError(f"expected 9 or 18 schedule columns, got {X.shape[1]}")
        return X

    def fit(self, X, y=None):
        X = self._validate(X)
        self.config_ = self._config()
        self.classes_ = np.array([int(t) for t in WorkerType])
        self.n_features_in_ = X.shape[1]
        return self

    def predict(self, X) -> np.ndarray:
        X = self._validate(X)
        cfg = getattr(self, "config_", None) or self._config()
        cols = [b.value - 1 for b in cfg.probe_bins]
        return np.array([int(classify_triple(*row[cols], cfg.epsilon)) for row in X])
