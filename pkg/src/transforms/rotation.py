"""Circle rotations x -> x + alpha mod 1"""

from typing import Any, Dict

from src.measure.numbers import ExactNumber, as_exact, exact_to_json, format_exact, frac_part, is_rational
from src.transforms.base import Transform
from src.transforms.interval_map import PiecewiseTranslation


class Rotation(Transform):
    """Additive rotation of the circle [0,1) by an exact angle"""

    def __init__(self, alpha: Any):
        self.alpha: ExactNumber = frac_part(as_exact(alpha))

    @property
    def name(self) -> str:
        return f"rotation({format_exact(self.alpha)})"

    @property
    def is_irrational(self) -> bool:
        return not is_rational(self.alpha)

    def build_interval_map(self) -> PiecewiseTranslation:
        return PiecewiseTranslation.from_rotation(self.alpha)

    def apply(self, x: Any) -> ExactNumber:
        return frac_part(as_exact(x) + self.alpha)

    def apply_inverse(self, x: Any) -> ExactNumber:
        return frac_part(as_exact(x) - self.alpha)

    def power(self, n: int) -> "Rotation":
        return Rotation(self.alpha * n)

    def to_json(self) -> Dict[str, Any]:
        return {"kind": "rotation", "alpha": exact_to_json(self.alpha)}
