"""Rokhlin towers for rotations and rank-one machines"""

from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Dict, List, Tuple

from src.core.errors import MachineTooShallowError, PreconditionError
from src.diophantine.continued_fraction import convergent_for_gap
from src.measure.intervals import IntervalSet, union_all
from src.measure.numbers import ExactNumber, as_exact, exact_to_json, is_rational
from src.transforms.base import Transform
from src.transforms.interval_map import PiecewiseTranslation
from src.transforms.rank_one import RankOneMachine
from src.transforms.rotation import Rotation
from src.transforms.simplex import SimplexTranslation
from src.utils.logging import get_logger

logger = get_logger(__name__)


@dataclass
class Tower:
    """Disjoint levels with level j+1 the image of level j"""

    levels: List[IntervalSet]
    return_height: int = 0
    gap: ExactNumber = Fraction(0)

    @property
    def base(self) -> IntervalSet:
        return self.levels[0]

    @property
    def height(self) -> int:
        return len(self.levels)

    @property
    def coverage(self) -> ExactNumber:
        return self.base.measure * self.height

    def verify(self, t: Transform) -> bool:
        """Exact check of disjointness and the level-to-level images"""
        seen = IntervalSet.empty()
        for level in self.levels:
            if not level.isdisjoint(seen):
                return False
            seen = seen | level
        return all(
            t.pushforward(lower) == upper for lower, upper in zip(self.levels, self.levels[1:])
        )

    def to_json(self) -> Dict[str, Any]:
        return {
            "height": self.height,
            "coverage": exact_to_json(self.coverage),
            "levels": [level.to_json() for level in self.levels],
        }


def first_return_columns(
    tmap: PiecewiseTranslation, target: IntervalSet, max_steps: int = 1_000_000
) -> List[Tuple[IntervalSet, int]]:
    """Decompose ``target`` by first-return time: [(base, return time), ...]

    The bases partition ``target`` and the columns {tau^i(base)} for i below
    the return time tile the space for an ergodic total map.
    """
    columns: List[Tuple[IntervalSet, int]] = []
    inverse = tmap.inverse()
    travelling = target
    for n in range(1, max_steps + 1):
        travelling = tmap.pushforward(travelling)
        hit = travelling & target
        if hit:
            base = hit
            for _ in range(n):
                base = inverse.pushforward(base)
            columns.append((base, n))
            travelling = travelling - hit
        if not travelling:
            return columns
    raise PreconditionError("first return did not complete; is the map ergodic?")


def _rotation_angle(t: Transform) -> ExactNumber:
    if isinstance(t, Rotation):
        return t.alpha
    if isinstance(t, SimplexTranslation) and t.m == 2:
        return t.alphas[0]
    raise PreconditionError(f"no rotation representation for {t.name}")


def _rotation_tower(t: Transform, height: int, eps: ExactNumber) -> Tower:
    alpha = _rotation_angle(t)
    if is_rational(alpha):
        raise PreconditionError("Rokhlin towers need an irrational rotation number")
    if eps <= 0:
        raise PreconditionError("an irrational rotation has no exact finite tower; use eps > 0")
    q, gap = convergent_for_gap(alpha, height / eps)
    target = IntervalSet([(0, gap)])
    columns = first_return_columns(t.interval_map, target)
    tmap = t.interval_map
    levels: List[List[IntervalSet]] = [[] for _ in range(height)]
    for base, r in columns:
        current = base
        stacked = (r // height) * height
        for i in range(stacked):
            levels[i % height].append(current)
            if i + 1 < stacked:
                current = tmap.pushforward(current)
    tower = Tower([union_all(parts) for parts in levels], return_height=q, gap=gap)
    logger.info(
        "rokhlin_tower_built",
        kind="rotation",
        height=height,
        q=q,
        columns=len(columns),
        coverage=str(tower.coverage),
    )
    return tower


def _machine_tower(machine: RankOneMachine, height: int, eps: ExactNumber) -> Tower:
    blocks = machine.height // height
    levels = [union_all(machine.levels[i * height + j] for i in range(blocks)) for j in range(height)]
    if blocks == 0 or levels[0].measure * height < 1 - eps:
        raise MachineTooShallowError(
            f"machine of height {machine.height} cannot hold a tower of height {height} "
            f"covering 1 - {eps}",
            {"height": machine.height, "requested": height},
        )
    return Tower(levels, return_height=machine.height)


def rokhlin_tower(t: Transform, height: int, eps: Any) -> Tower:
    """Tower of the requested height covering at least 1 - eps"""
    eps = as_exact(eps)
    if height < 1:
        raise PreconditionError("tower height must be at least 1")
    if eps < 0:
        raise PreconditionError("eps must be nonnegative")
    if isinstance(t, RankOneMachine):
        return _machine_tower(t, height, eps)
    if height == 1:
        return Tower([IntervalSet.unit()])
    return _rotation_tower(t, height, eps)
