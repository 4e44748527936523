"""Experiment documents, pipelines, output writers and the run verifier"""

from src.orchestrator.experiments import load_experiment, parse_experiment
from src.orchestrator.outputs import emit_outputs
from src.orchestrator.pipelines import ExperimentRunner, Outcome, build_outcome, run_experiment
from src.orchestrator.verify import VerificationSummary, verify_run

__all__ = [
    "load_experiment",
    "parse_experiment",
    "emit_outputs",
    "ExperimentRunner",
    "Outcome",
    "build_outcome",
    "run_experiment",
    "VerificationSummary",
    "verify_run",
]
