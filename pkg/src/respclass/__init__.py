"""Responder classification from randomized-experiment data under monotonicity."""
from .core import (Constant, DataError, Dataset, GroundTruth, NumericError, PerObservation, Theta,
                   read_dataset, validate_dataset, write_dataset)
from .evaluation import EvalReport, ReplicationSummary, accuracy_vs_bayes, estimate_losses, policy_value
from .surrogate import SurrogateData, balanced_theta, generative_examples, to_surrogate
from .synthetic import Scenario, ScenarioSpec, bayes_label, generate

__version__ = "0.1.0"

__all__ = [
    "Constant", "DataError", "Dataset", "GroundTruth", "NumericError", "PerObservation", "Theta",
    "read_dataset", "validate_dataset", "write_dataset", "EvalReport", "ReplicationSummary",
    "accuracy_vs_bayes", "estimate_losses", "policy_value", "SurrogateData", "balanced_theta",
    "generative_examples", "to_surrogate", "Scenario", "ScenarioSpec", "bayes_label", "generate",
]
