"""Interface definitions for experiment pipeline steps"""

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from datetime import datetime
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional

from src.core.errors import ConstructionError, WorkbenchError


class StepStatus(str, Enum):
    """Status of a pipeline step"""

    PENDING = "pending"
    RUNNING = "running"
    COMPLETED = "completed"
    FAILED = "failed"
    SKIPPED = "skipped"


@dataclass
class StepResult:
    """Result of a pipeline step execution"""

    status: StepStatus
    items: int = 0
    start_time: Optional[datetime] = None
    end_time: Optional[datetime] = None
    error: Optional[WorkbenchError] = None
    details: Dict[str, Any] = field(default_factory=dict)

    @property
    def duration_seconds(self) -> Optional[float]:
        if self.start_time and self.end_time:
            return (self.end_time - self.start_time).total_seconds()
        return None

    @property
    def error_message(self) -> Optional[str]:
        return self.error.message if self.error else None


class PipelineStep(ABC):
    """Base class for all pipeline steps

    Steps never raise: errors come back in a FAILED result so the runner can
    stop and hand them to the caller. Anything that is not a workbench error
    is wrapped in a ConstructionError naming the step.
    """

    @property
    @abstractmethod
    def name(self) -> str:
        """Return the name of this step"""

    @abstractmethod
    async def execute(self, context: "PipelineContext") -> StepResult:
        """Execute the pipeline step"""

    async def _guarded(self, context: "PipelineContext", work: Any) -> StepResult:
        start_time = datetime.utcnow()
        try:
            items = await work(context)
            return StepResult(StepStatus.COMPLETED, items=items, start_time=start_time, end_time=datetime.utcnow())
        except WorkbenchError as exc:
            return StepResult(StepStatus.FAILED, start_time=start_time, end_time=datetime.utcnow(), error=exc)
        except Exception as exc:
            wrapped = ConstructionError(f"{type(exc).__name__}: {exc}", {"step": self.name})
            wrapped.__cause__ = exc
            return StepResult(StepStatus.FAILED, start_time=start_time, end_time=datetime.utcnow(), error=wrapped)


class Construction(PipelineStep):
    """Runs one construction and stores its outcome under ``outcome``"""

    @abstractmethod
    async def construct(self, context: "PipelineContext") -> Any:
        """Build the mathematical object and its certificate"""

    async def execute(self, context: "PipelineContext") -> StepResult:
        async def work(ctx: "PipelineContext") -> int:
            ctx.data["outcome"] = await self.construct(ctx)
            return 1

        return await self._guarded(context, work)


class Emitter(PipelineStep):
    """Writes files for a finished construction"""

    @abstractmethod
    async def emit(self, context: "PipelineContext") -> List[Path]:
        """Write output files and return their paths"""

    async def execute(self, context: "PipelineContext") -> StepResult:
        if "outcome" not in context.data:
            return StepResult(StepStatus.SKIPPED, details={"reason": "no construction outcome"})

        async def work(ctx: "PipelineContext") -> int:
            paths = await self.emit(ctx)
            ctx.artifacts.extend(paths)
            return len(paths)

        return await self._guarded(context, work)


@dataclass
class PipelineContext:
    """Context passed through pipeline steps"""

    run_id: str
    run_dir: Path
    data: Dict[str, Any] = field(default_factory=dict)
    metadata: Dict[str, Any] = field(default_factory=dict)
    artifacts: List[Path] = field(default_factory=list)
    warnings: List[str] = field(default_factory=list)

    def add_warning(self, message: str) -> None:
        self.warnings.append(message)

    def set_metadata(self, key: str, value: Any) -> None:
        self.metadata[key] = value

    def get_metadata(self, key: str, default: Any = None) -> Any:
        return self.metadata.get(key, default)
