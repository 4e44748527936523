"""Coboundaries over simplex translations (rationally independent measures)"""

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Dict, List, Optional

from src.cocycle.birkhoff import CocycleReport, cocycle_norm_sweep
from src.config.settings import Settings
from src.core.errors import PreconditionError
from src.measure.numbers import ExactNumber, exact_to_json
from src.measure.step_functions import StepFunction
from src.step_coboundary.classify import INDEPENDENT, Classification, classify_step_function
from src.transforms.base import ExplicitMap
from src.transforms.simplex import SimplexState, SimplexTranslation
from src.utils.logging import get_logger

logger = get_logger(__name__)


@dataclass
class TorusCoboundary:
    """f realized as a coboundary of the minimum-index simplex translation

    The piece A_j of f is matched to the set B_j where coordinate j is
    decremented; on states, f = h - h∘tau with h(x) = sum a_j x_j.
    """

    translation: SimplexTranslation
    values: List[ExactNumber]
    bound: ExactNumber
    classification: Optional[Classification] = None
    notes: List[str] = field(default_factory=list)

    @property
    def m(self) -> int:
        return self.translation.m

    def transfer(self) -> Callable[[SimplexState], ExactNumber]:
        return self.translation.transfer(self.values)

    def observable(self) -> StepFunction:
        """f in the point coordinate of the planar translation"""
        return self.translation.observed_function(self.values)

    def transported(self) -> ExplicitMap:
        """The translation carried onto the original pieces A_j by the matching"""
        if self.classification is None:
            raise PreconditionError("no pieces to transport onto")
        pieces = [p.support for p in self.classification.pieces]
        phi = self.translation.matching(pieces)
        rotation = self.translation.interval_map
        return ExplicitMap(phi.compose(rotation.compose(phi.inverse())), "transported_simplex")

    def identity_defect(self, steps: int) -> ExactNumber:
        """max |f - (h - h∘tau)| along the orbit of the origin; zero for a valid transfer"""
        h = self.transfer()
        worst: ExactNumber = Fraction(0)
        for state in self.translation.orbit(self.translation.origin(), steps):
            lhs = self.translation.observe(self.values, state)
            gap = abs(lhs - (h(state) - h(self.translation.step(state))))
            worst = max(worst, gap)
        return worst

    def sweep(self, n_max: int, samples: Optional[int] = None, settings: Optional[Settings] = None) -> CocycleReport:
        if self.m == 2:
            return cocycle_norm_sweep(
                self.translation, self.observable(), "inf", n_max, transfer_bound=self.bound, settings=settings
            )
        return cocycle_norm_sweep(
            self.translation, self.values, "inf", n_max,
            transfer_bound=self.bound, settings=settings, samples=samples,
        )

    def to_json(self) -> Dict[str, Any]:
        return {
            "transform": self.translation.to_json(),
            "transfer": {"kind": "linear", "coefficients": [exact_to_json(a) for a in self.values]},
            "certificate": {"bound": exact_to_json(self.bound), "formula": "2m*sum|a_j|"},
            "notes": self.notes,
        }


def build_torus_coboundary(
    f: StepFunction, classification: Optional[Classification] = None
) -> TorusCoboundary:
    if not f:
        # any translation carries the zero function with h = 0
        half = Fraction(1, 2)
        result = TorusCoboundary(SimplexTranslation([half, half]), [Fraction(0), Fraction(0)], Fraction(0))
        result.notes.append("zero function: transfer h = 0")
        return result
    classification = classification or classify_step_function(f)
    if classification.case != INDEPENDENT:
        raise PreconditionError(
            f"torus construction needs rationally independent measures, got {classification.case}"
        )
    t = SimplexTranslation(classification.measures)
    values = classification.values
    bound = 2 * t.m * sum((abs(a) for a in values), Fraction(0))
    logger.info("torus_coboundary_built", m=t.m, bound=str(bound))
    return TorusCoboundary(t, values, bound, classification)
