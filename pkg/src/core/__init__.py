"""Pipeline steps, runner and error hierarchy"""

from src.core.interfaces import Construction, Emitter, PipelineContext, PipelineStep, StepResult, StepStatus
from src.core.pipeline import Pipeline, PipelineResult

__all__ = [
    "Construction",
    "Emitter",
    "PipelineStep",
    "PipelineContext",
    "StepResult",
    "StepStatus",
    "Pipeline",
    "PipelineResult",
]
