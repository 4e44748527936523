"""Two-floor extensions of a rotation

The space {(x, 0)} ∪ {(x, 1) : x in D} is normalized onto [0,1) with
c = 1/(1 + p(D)): floor 0 sits on [0, c) as y = c*x and floor 1 on [c, 1) as
y = c*(1 + p(D ∩ [0, x))). The map is
    (x, 0) -> (x, 1) if x in D, else (R x, 0)
    (x, 1) -> (R x, 0)
which is again a piecewise translation.
"""

from fractions import Fraction
from typing import Any, Dict, List, Tuple

from src.core.errors import PreconditionError, UndefinedPointError
from src.measure.intervals import IntervalSet
from src.measure.numbers import ExactNumber, as_exact, exact_to_json
from src.measure.step_functions import StepFunction
from src.transforms.base import Transform
from src.transforms.interval_map import Branch, PiecewiseTranslation
from src.transforms.rotation import Rotation


class FiniteExtension(Transform):
    """Skyscraper of height two over ``D`` for a rotation base"""

    def __init__(self, base: Rotation, skyscraper: IntervalSet):
        if not base.is_total:
            raise PreconditionError("extension base must be defined everywhere")
        self.base = base
        self.skyscraper = skyscraper
        self.scale: ExactNumber = 1 / (1 + skyscraper.measure)

    @property
    def name(self) -> str:
        return f"extension({self.base.name}, p(D)={self.skyscraper.measure})"

    @property
    def floors(self) -> Tuple[IntervalSet, IntervalSet]:
        return IntervalSet([(0, self.scale)]), IntervalSet([(self.scale, 1)])

    def _below(self, x: Any) -> ExactNumber:
        return self.skyscraper.measure_below(x)

    def lift(self, x: Any, floor: int) -> ExactNumber:
        x = as_exact(x)
        if floor == 0:
            return self.scale * x
        if not self.skyscraper.contains(x):
            raise UndefinedPointError(f"{x} is not under the skyscraper", point=x)
        return self.scale * (1 + self._below(x))

    def project(self, y: Any) -> Tuple[ExactNumber, int]:
        y = as_exact(y)
        if y < self.scale:
            return y / self.scale, 0
        return self.skyscraper.point_at_measure(y / self.scale - 1), 1

    def lift_set(self, s: IntervalSet, floor: int) -> IntervalSet:
        if floor == 0:
            return IntervalSet._trusted([(self.scale * lo, self.scale * hi) for lo, hi in s])
        out = []
        for lo, hi in s & self.skyscraper:
            out.append((self.lift(lo, 1), self.lift(lo, 1) + self.scale * (hi - lo)))
        return IntervalSet._trusted(out)

    def build_interval_map(self) -> PiecewiseTranslation:
        c = self.scale
        rot = self.base.interval_map
        branches: List[Branch] = []
        below: ExactNumber = Fraction(0)
        for a, b in self.skyscraper:
            # floor 0 over D climbs to floor 1
            branches.append((c * a, c * b, c * (1 + below - a)))
            # floor 1 over D comes down through the rotation
            for lo, hi, s in rot.restrict(IntervalSet._trusted([(a, b)])).branches:
                offset = 1 + below - a
                branches.append((c * (lo + offset), c * (hi + offset), c * (s - offset)))
            below = below + (b - a)
        for lo, hi, s in rot.restrict(self.skyscraper.complement()).branches:
            branches.append((c * lo, c * hi, c * s))
        return PiecewiseTranslation(branches)

    def lift_function(self, base_function: StepFunction, top_value: Any) -> StepFunction:
        """Function equal to ``base_function`` on floor 0 and ``top_value`` on floor 1"""
        c = self.scale
        atoms = [(c * lo, c * hi, v) for lo, hi, v in base_function.atoms]
        atoms.append((c, Fraction(1), as_exact(top_value)))
        return StepFunction(atoms)

    def to_json(self) -> Dict[str, Any]:
        return {
            "kind": "finite_extension",
            "base": self.base.to_json(),
            "skyscraper": self.skyscraper.to_json(),
            "scale": exact_to_json(self.scale),
        }
