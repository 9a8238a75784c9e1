"""Worker preferences for peer information: models, elicitation, typing and welfare."""

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
    learning_value_of_search,
    learning_wtp,
    social_effort,
    social_wtp,
    stress_effort,
    stress_wtp,
    value_no_info,
)
from peerinfo.elicitation import (
    BdmOutcome,
    PerformanceBin,
    TreatmentArm,
    WtpSchedule,
    assign_arm,
    bdm_resolve,
    build_wtp_schedule,
    realized_bin,
)
from peerinfo.classifier import ClassifierConfig, ProfileTypeClassifier, WorkerType, classify, type_shares
from peerinfo.clustering import KMeans, SilhouetteKMeans, kmeans, select_k, silhouette

__version__ = "0.1.0"

__all__ = [
    "BdmOutcome",
    "BeliefPMF",
    "ClassifierConfig",
    "EffortCostParams",
    "KMeans",
    "LearningParams",
    "PerformanceBin",
    "ProfileTypeClassifier",
    "Scenario",
    "SilhouetteKMeans",
    "SocialKind",
    "SocialPrefParams",
    "StressParams",
    "TreatmentArm",
    "WorkerType",
    "WtpSchedule",
    "assign_arm",
    "bdm_resolve",
    "build_wtp_schedule",
    "classify",
    "effort_no_info",
    "kmeans",
    "learning_effort",
    "learning_posterior",
    "learning_value_of_search",
    "learning_wtp",
    "realized_bin",
    "select_k",
    "silhouette",
    "social_effort",
    "social_wtp",
    "stress_effort",
    "stress_wtp",
    "type_shares",
    "value_no_info",
]
