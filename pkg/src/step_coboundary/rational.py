"""Coboundaries over odometers for step functions with rational piece measures"""

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Optional

from src.config.settings import Settings
from src.core.errors import PreconditionError
from src.diophantine.eigen import EigenvalueCheck, eigenvalue_witness
from src.measure.intervals import IntervalSet
from src.measure.numbers import ExactNumber, exact_to_json, format_exact
from src.measure.step_functions import StepFunction
from src.step_coboundary.classify import ALL_RATIONAL, Classification, classify_step_function
from src.transforms.rank_one import RankOneMachine
from src.utils.logging import get_logger

logger = get_logger(__name__)


@dataclass
class StageCheck:
    stage: int
    height: int
    coverage: ExactNumber
    defect: StepFunction

    @property
    def exact(self) -> bool:
        return not self.defect

    def to_json(self) -> Dict[str, Any]:
        return {
            "stage": self.stage,
            "height": self.height,
            "coverage": exact_to_json(self.coverage),
            "exact": self.exact,
        }


@dataclass
class RationalCoboundary:
    """Column of 1/q levels drawn from the pieces, restacked q-adically

    g is constant on the initial levels and fixed across stages; later
    stages only refine the column.
    """

    f: StepFunction
    q: int
    column: List[IntervalSet]
    g_levels: List[ExactNumber]
    g: StepFunction
    machine: RankOneMachine
    classification: Classification
    stages: List[StageCheck] = field(default_factory=list)

    @property
    def exact(self) -> bool:
        return all(stage.exact for stage in self.stages)

    def eigenvalue_check(
        self, samples: Optional[int] = None, settings: Optional[Settings] = None
    ) -> EigenvalueCheck:
        """exp(2 pi i p(E)) for E the first piece of a two-valued f"""
        values = sorted(set(self.classification.values))
        if len(values) != 2:
            raise PreconditionError(
                "eigenvalue check needs exactly two step values", details={"values": [str(v) for v in values]}
            )
        first = self.classification.pieces[0]
        other = next(v for v in values if v != first.value)
        scale = first.value - other
        indicator = StepFunction.indicator(first.support)
        # 1_E - p(E) = f / (a - b)
        h = self.g.scale(1 / scale)
        return eigenvalue_witness(indicator, self.machine, h, samples=samples, settings=settings)

    def to_json(self) -> Dict[str, Any]:
        return {
            "transform": self.machine.to_json(),
            "transfer": {
                "kind": "step",
                "column": [level.to_json() for level in self.column],
                "values": [exact_to_json(v) for v in self.g_levels],
            },
            "certificate": {
                "q": self.q,
                "bound": exact_to_json(2 * self.g.sup_norm()),
                "stages": [stage.to_json() for stage in self.stages],
            },
        }


def check_stage(f: StepFunction, g: StepFunction, machine: RankOneMachine, stage: int) -> StageCheck:
    """f - (g - g∘tau) on the region where the machine is defined"""
    region = machine.domain
    moved = g.compose(machine.interval_map)
    defect = (f - g + moved).restrict(region)
    return StageCheck(stage, machine.height, region.measure, defect)


def build_rational_coboundary(
    f: StepFunction, stages: int = 3, classification: Optional[Classification] = None
) -> RationalCoboundary:
    classification = classification or classify_step_function(f)
    if classification.case != ALL_RATIONAL:
        raise PreconditionError(
            f"odometer construction needs rational piece measures, got {classification.case}"
        )
    q = classification.common_denominator
    column: List[IntervalSet] = []
    level_values: List[ExactNumber] = []
    for piece in classification.pieces:
        count = int(piece.measure * q)
        column.extend(piece.support.split_measure(count))
        level_values.extend([piece.value] * count)

    # g(L_1) = 0, g(L_{j+1}) = g(L_j) - f(L_j)
    g_values: List[ExactNumber] = [Fraction(0)]
    for value in level_values[:-1]:
        g_values.append(g_values[-1] - value)
    g = StepFunction.from_pieces(zip(column, g_values))

    machine = RankOneMachine.from_column(column)
    checks = [check_stage(f, g, machine, 0)]
    if q > 1:
        for stage in range(1, stages + 1):
            machine = machine.cut_and_stack(q)
            checks.append(check_stage(f, g, machine, stage))
    result = RationalCoboundary(f, q, column, g_values, g, machine, classification, checks)
    failed = [c.stage for c in checks if not c.exact]
    if failed:
        logger.error("rational_coboundary_defect", stages=failed)
    logger.info(
        "rational_coboundary_built",
        q=q,
        height=machine.height,
        g=[format_exact(v) for v in g_values],
        exact=result.exact,
    )
    return result
