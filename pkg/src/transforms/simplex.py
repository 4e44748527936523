"""Translations of the simplex (torus) with the minimum-index rule

A state is a vector of m exact coordinates. One step adds alpha_i to every
coordinate and subtracts 1 from the coordinate j that maximizes x_j + alpha_j
(the smallest such index on ties). With sum(alpha) = 1 the coordinate sum is
conserved.

For m = 2 the dynamics on the invariant line x_0 + x_1 = 0 are the rotation by
alpha_0 in the coordinate v = x_0 + 1/2, which gives the exact interval-map
representation.
"""

from fractions import Fraction
from typing import Any, Callable, Dict, List, Sequence, Tuple

from src.core.errors import PreconditionError, UndefinedPointError
from src.measure.intervals import IntervalSet
from src.measure.numbers import ExactNumber, as_exact, exact_to_json, format_exact
from src.measure.step_functions import StepFunction
from src.transforms.base import Transform
from src.transforms.interval_map import PiecewiseTranslation

SimplexState = Tuple[ExactNumber, ...]

HALF = Fraction(1, 2)


class SimplexTranslation(Transform):
    """tau_alpha on m coordinates"""

    def __init__(self, alphas: Sequence[Any]):
        values = [as_exact(a) for a in alphas]
        if len(values) < 2:
            raise PreconditionError("a simplex translation needs at least two coordinates")
        if any(a <= 0 for a in values):
            raise PreconditionError("translation weights must be positive")
        if sum(values, Fraction(0)) != 1:
            raise PreconditionError("translation weights must sum to 1")
        self.alphas: Tuple[ExactNumber, ...] = tuple(values)

    @property
    def m(self) -> int:
        return len(self.alphas)

    @property
    def name(self) -> str:
        return "simplex(" + ", ".join(format_exact(a) for a in self.alphas) + ")"

    def origin(self) -> SimplexState:
        return tuple(Fraction(0) for _ in self.alphas)

    # State dynamics

    def decrement_index(self, state: Sequence[Any]) -> int:
        best = 0
        best_value = state[0] + self.alphas[0]
        for i in range(1, self.m):
            value = state[i] + self.alphas[i]
            if value > best_value:
                best, best_value = i, value
        return best

    def step(self, state: Sequence[Any]) -> SimplexState:
        j = self.decrement_index(state)
        return tuple(x + a - (1 if i == j else 0) for i, (x, a) in enumerate(zip(state, self.alphas)))

    def step_inverse(self, state: Sequence[Any]) -> SimplexState:
        for j in range(self.m):
            candidate = tuple(
                y - a + (1 if i == j else 0) for i, (y, a) in enumerate(zip(state, self.alphas))
            )
            if self.decrement_index(candidate) == j:
                return candidate
        raise UndefinedPointError(f"state {state} has no preimage", point=state)

    def orbit(self, state: Sequence[Any], n: int) -> List[SimplexState]:
        out = [tuple(state)]
        for _ in range(n - 1):
            out.append(self.step(out[-1]))
        return out

    def apply(self, x: Any) -> Any:
        if isinstance(x, tuple):
            return self.step(x)
        return super().apply(x)

    def apply_inverse(self, x: Any) -> Any:
        if isinstance(x, tuple):
            return self.step_inverse(x)
        return super().apply_inverse(x)

    def observe(self, values: Sequence[Any], state: Sequence[Any]) -> ExactNumber:
        """Value a_j of the piece matched to the set where coordinate j decrements"""
        return as_exact(values[self.decrement_index(state)])

    def transfer(self, values: Sequence[Any]) -> Callable[[Sequence[Any]], ExactNumber]:
        """h(x) = sum a_j x_j, with observe(values) - mean = h - h∘tau"""
        coefs = [as_exact(a) for a in values]

        def h(state: Sequence[Any]) -> ExactNumber:
            total: ExactNumber = Fraction(0)
            for a, x in zip(coefs, state):
                total = total + a * x
            return total

        return h

    # Interval representation (m = 2)

    def _require_planar(self) -> None:
        if self.m != 2:
            raise PreconditionError(
                f"interval representation exists only for two coordinates, got {self.m}"
            )

    def build_interval_map(self) -> PiecewiseTranslation:
        self._require_planar()
        return PiecewiseTranslation.from_rotation(self.alphas[0])

    def to_point(self, state: Sequence[Any]) -> ExactNumber:
        self._require_planar()
        return state[0] + HALF

    def from_point(self, v: Any) -> SimplexState:
        self._require_planar()
        v = as_exact(v)
        return (v - HALF, HALF - v)

    def dynamical_sets(self) -> List[IntervalSet]:
        """B_j (in the point coordinate): where coordinate j is decremented"""
        self._require_planar()
        cut = 1 - self.alphas[0]
        return [IntervalSet([(cut, 1)]), IntervalSet([(0, cut)])]

    def matching(self, pieces: Sequence[IntervalSet]) -> PiecewiseTranslation:
        """Order-preserving rearrangement carrying each B_j onto the piece A_j"""
        b_sets = self.dynamical_sets()
        if len(pieces) != len(b_sets):
            raise PreconditionError("need one piece per coordinate")
        branches: List[Tuple[ExactNumber, ExactNumber, ExactNumber]] = []
        for b, a in zip(b_sets, pieces):
            branches.extend(PiecewiseTranslation.match_sets(b, a).branches)
        return PiecewiseTranslation(branches)

    def observed_function(self, values: Sequence[Any]) -> StepFunction:
        """sum a_j 1_{B_j} as a step function of the point coordinate"""
        return StepFunction.from_pieces(zip(self.dynamical_sets(), values))

    def transfer_at_point(self, values: Sequence[Any]) -> Callable[[Any], ExactNumber]:
        h = self.transfer(values)
        return lambda v: h(self.from_point(v))

    def to_json(self) -> Dict[str, Any]:
        return {"kind": "simplex", "alphas": [exact_to_json(a) for a in self.alphas]}
