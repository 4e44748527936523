"""Experiment documents

One JSON document describes one run. The ``pipeline`` field selects the
model; numbers are exact strings such as "1/3", "√2-1" or "(5-3√2)/2".
"""

from pathlib import Path
from typing import Annotated, Any, Dict, List, Literal, Optional, Tuple, Union

import orjson
from pydantic import BaseModel, ConfigDict, Field, TypeAdapter, ValidationError, field_validator

from src.core.errors import ConfigError
from src.measure.numbers import ExactNumber, parse_exact
from src.measure.step_functions import StepFunction, step_function
from src.transforms.base import Transform
from src.transforms.rank_one import RankOneMachine
from src.transforms.rotation import Rotation
from src.transforms.simplex import SimplexTranslation

Exact = Union[str, int]


def exact(value: Exact) -> ExactNumber:
    return parse_exact(str(value))


class _Model(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class TransformSpec(_Model):
    """rotation(alpha), simplex(alphas), odometer(cuts, stages), chacon(stages) or rank_one(recipe)"""

    kind: Literal["rotation", "simplex", "odometer", "chacon", "rank_one"]
    alpha: Optional[Exact] = None
    alphas: Optional[List[Exact]] = None
    cuts: int = 2
    stages: int = Field(default=4, ge=0)
    recipe: List[Dict[str, Any]] = Field(default_factory=list)

    def build(self) -> Transform:
        if self.kind == "rotation":
            if self.alpha is None:
                raise ConfigError("rotation needs alpha")
            return Rotation(exact(self.alpha))
        if self.kind == "simplex":
            if not self.alphas:
                raise ConfigError("simplex translation needs alphas")
            return SimplexTranslation([exact(a) for a in self.alphas])
        return self.machine()

    def machine(self) -> RankOneMachine:
        if self.kind == "odometer":
            return RankOneMachine.odometer(self.cuts, self.stages)
        if self.kind == "chacon":
            return RankOneMachine.chacon(self.stages)
        if self.kind == "rank_one":
            return RankOneMachine.replay(self.recipe)
        raise ConfigError(f"{self.kind} is not a rank-one machine")


StepData = List[Tuple[Exact, Exact, Exact]]


def build_step(data: StepData) -> StepFunction:
    return step_function([[str(lo), str(hi), str(v)] for lo, hi, v in data])


class SweepExperiment(_Model):
    """Norm sweep of S_n f; simplex translations with m > 2 take piece ``values`` instead of f"""

    pipeline: Literal["sweep"]
    transform: TransformSpec
    f: StepData = Field(default_factory=list)
    values: Optional[List[Exact]] = None
    r: str = "inf"
    n_max: int = Field(gt=0)
    transfer_bound: Optional[Exact] = None
    tightness_eps: Optional[Exact] = None
    two_sided: bool = False
    samples: Optional[int] = Field(default=None, gt=0)
    seed: Optional[int] = None


class StepCoboundaryExperiment(_Model):
    """Classifies f and runs the matching construction"""

    pipeline: Literal["step-coboundary"]
    f: StepData
    stages: int = Field(default=3, ge=1)
    n_max: int = Field(default=100, gt=0)
    samples: Optional[int] = Field(default=None, gt=0)
    seed: Optional[int] = None


class SourceSpec(_Model):
    kind: str = "centered"
    params: Dict[str, Any] = Field(default_factory=dict)


class WeakMixingExperiment(_Model):
    pipeline: Literal["weak-mixing"]
    source: SourceSpec = Field(default_factory=SourceSpec)
    eps: List[Exact]
    N: List[int]
    stages: int = Field(ge=1)

    @field_validator("N")
    @classmethod
    def _same_length(cls, value: List[int], info: Any) -> List[int]:
        eps = info.data.get("eps")
        if eps is not None and len(eps) != len(value):
            raise ValueError("eps and N must have the same length")
        return value


class NonCoboundaryExperiment(_Model):
    """One of the explicit non-coboundary constructions on a rank-one machine"""

    pipeline: Literal["non-coboundary"]
    construction: Literal["almost-invariant", "slow-escape", "slow-growth", "series", "transfer"]
    machine: TransformSpec = Field(default_factory=lambda: TransformSpec(kind="odometer", stages=10))
    # almost-invariant
    delta: Exact = "1/2"
    n: int = Field(default=4, ge=0)
    eps: Exact = "1/4"
    # slow-escape
    eps_schedule: List[Exact] = Field(default_factory=list)
    # slow-growth
    rate: str = "sqrt"
    exponent: Optional[Exact] = None
    n_min: int = Field(default=16, ge=1)
    n_max: int = Field(default=64, ge=1)
    # series
    eps1: Exact = "1/32"
    ratio: Exact = "1/32"
    stages: int = Field(default=3, ge=1)
    n1: int = Field(default=4, ge=1)
    growth: int = Field(default=4, ge=2)
    # transfer
    N_max: int = Field(default=4, ge=1)


class DiophantineExperiment(_Model):
    pipeline: Literal["diophantine"]
    mode: Literal["transfer", "obstruction", "approximation"]
    alpha: Optional[Exact] = None
    coefficients: List[Dict[str, Any]] = Field(default_factory=list)
    band: int = Field(default=8, ge=0)
    power: int = Field(default=1, ge=1)
    rho: str = "log_over_n"
    depth: int = Field(default=10_000, gt=1)
    x: List[Exact] = Field(default_factory=list)
    exponent: int = Field(default=1, ge=1)
    q_max: Optional[int] = Field(default=None, gt=0)
    samples: Optional[int] = Field(default=None, gt=0)
    seed: Optional[int] = None


class JointApproxExperiment(_Model):
    pipeline: Literal["joint-approx"]
    machine: TransformSpec = Field(default_factory=lambda: TransformSpec(kind="odometer", stages=8))
    K: StepData
    M: int = Field(gt=0)
    N: int = Field(gt=0)


Experiment = Annotated[
    Union[
        SweepExperiment,
        StepCoboundaryExperiment,
        WeakMixingExperiment,
        NonCoboundaryExperiment,
        DiophantineExperiment,
        JointApproxExperiment,
    ],
    Field(discriminator="pipeline"),
]

_adapter: TypeAdapter[Any] = TypeAdapter(Experiment)


def parse_experiment(data: Any) -> Any:
    """Validate a decoded document; schema problems become ConfigError"""
    if not data:
        raise ConfigError("empty experiment document")
    try:
        return _adapter.validate_python(data)
    except ValidationError as exc:
        raise ConfigError(
            "experiment document does not match the schema",
            {"errors": "; ".join(f"{'.'.join(map(str, e['loc']))}: {e['msg']}" for e in exc.errors())},
        ) from exc


def load_experiment(path: Path) -> Any:
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise ConfigError(f"cannot read experiment document {path}: {exc}") from exc
    if not raw.strip():
        raise ConfigError(f"experiment document {path} is empty")
    try:
        data = orjson.loads(raw)
    except orjson.JSONDecodeError as exc:
        raise ConfigError(f"experiment document {path} is not JSON: {exc}") from exc
    return parse_experiment(data)


def dump_experiment(experiment: Any) -> Dict[str, Any]:
    return experiment.model_dump(mode="json")
