"""Feedback-based joint active/passive beam training for RIS-assisted ISAC."""

from .afsa import AFPosition, AFSAParams, TrainingResult, decode, run_training
from .baselines import ACOParams, PSOParams, run_aco, run_pso
from .channel import ChannelSet, Scenario, generate_channels
from .harness import ExperimentConfig, RunRecord, load_config, run_experiment, summarize
from .oracle import BeamPair, FeedbackOracle

__version__ = "0.1.0"

__all__ = [
    "ACOParams",
    "AFPosition",
    "AFSAParams",
    "BeamPair",
    "ChannelSet",
    "ExperimentConfig",
    "FeedbackOracle",
    "PSOParams",
    "RunRecord",
    "Scenario",
    "TrainingResult",
    "decode",
    "generate_channels",
    "load_config",
    "run_aco",
    "run_experiment",
    "run_pso",
    "run_training",
    "summarize",
]
