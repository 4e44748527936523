"""Pipeline orchestration and execution"""

from dataclasses import dataclass, field
from datetime import datetime
from typing import Any, Dict, List, Optional

from src.core.errors import WorkbenchError
from src.core.interfaces import PipelineContext, PipelineStep, StepResult, StepStatus
from src.utils.logging import get_logger

logger = get_logger(__name__)


@dataclass
class PipelineResult:
    """Result of a complete pipeline execution"""

    run_id: str
    status: StepStatus
    start_time: datetime
    end_time: Optional[datetime] = None
    step_results: Dict[str, StepResult] = field(default_factory=dict)
    error: Optional[WorkbenchError] = None
    warnings: List[str] = field(default_factory=list)

    @property
    def duration_seconds(self) -> Optional[float]:
        if self.end_time:
            return (self.end_time - self.start_time).total_seconds()
        return None

    @property
    def exit_code(self) -> int:
        return self.error.exit_code if self.error else 0

    def to_dict(self) -> Dict[str, Any]:
        """Summary for logs; timings make it unsuitable for canonical reports"""
        return {
            "run_id": self.run_id,
            "status": self.status.value,
            "duration_seconds": self.duration_seconds,
            "error": self.error.to_dict() if self.error else None,
            "warnings": self.warnings,
            "step_results": {
                name: {
                    "status": result.status.value,
                    "items": result.items,
                    "duration_seconds": result.duration_seconds,
                    "error_message": result.error_message,
                }
                for name, result in self.step_results.items()
            },
        }


class Pipeline:
    """Runs steps in order and stops at the first failure"""

    def __init__(self, name: str, steps: Optional[List[PipelineStep]] = None):
        self.name = name
        self.steps: List[PipelineStep] = steps or []
        self._running = False

    def add_step(self, step: PipelineStep) -> "Pipeline":
        self.steps.append(step)
        return self

    def add_steps(self, steps: List[PipelineStep]) -> "Pipeline":
        self.steps.extend(steps)
        return self

    async def execute(self, context: PipelineContext) -> PipelineResult:
        if self._running:
            raise RuntimeError("Pipeline is already running")
        self._running = True
        run_id = context.run_id
        result = PipelineResult(run_id=run_id, status=StepStatus.RUNNING, start_time=datetime.utcnow())
        logger.info("pipeline_started", pipeline=self.name, run_id=run_id, steps_count=len(self.steps))

        try:
            for step in self.steps:
                logger.info("step_started", pipeline=self.name, run_id=run_id, step=step.name)
                step_result = await step.execute(context)
                result.step_results[step.name] = step_result

                if step_result.status == StepStatus.COMPLETED:
                    logger.info(
                        "step_completed",
                        pipeline=self.name,
                        run_id=run_id,
                        step=step.name,
                        items=step_result.items,
                        duration=step_result.duration_seconds,
                    )
                elif step_result.status == StepStatus.FAILED:
                    logger.error(
                        "step_failed",
                        pipeline=self.name,
                        run_id=run_id,
                        step=step.name,
                        error=step_result.error_message,
                    )
                    result.status = StepStatus.FAILED
                    result.error = step_result.error
                    break
                else:
                    logger.info(
                        "step_skipped",
                        pipeline=self.name,
                        run_id=run_id,
                        step=step.name,
                        reason=step_result.details.get("reason"),
                    )

            if result.status != StepStatus.FAILED:
                result.status = StepStatus.COMPLETED
            result.warnings.extend(context.warnings)
        finally:
            result.end_time = datetime.utcnow()
            self._running = False
            logger.info(
                "pipeline_completed",
                pipeline=self.name,
                run_id=run_id,
                status=result.status.value,
                duration=result.duration_seconds,
                artifacts=len(context.artifacts),
            )
        return result

    @property
    def is_running(self) -> bool:
        return self._running
