"""Rank-one cutting-and-stacking machines"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence, Tuple

from src.core.errors import ConfigError, InsufficientResidualError, UndefinedPointError
from src.measure.intervals import IntervalSet, union_all
from src.measure.numbers import ExactNumber, exact_to_json
from src.transforms.base import Transform
from src.transforms.interval_map import PiecewiseTranslation
from src.utils.logging import get_logger

logger = get_logger(__name__)


@dataclass(frozen=True)
class StackStep:
    """One cut-and-stack operation: cut into ``cuts`` sub-columns, restack them
    in ``order`` and put ``spacers[i]`` new levels on top of slot i"""

    cuts: int
    order: Tuple[int, ...]
    spacers: Tuple[int, ...]

    @classmethod
    def create(
        cls, cuts: int, order: Optional[Sequence[int]] = None, spacers: Optional[Sequence[int]] = None
    ) -> "StackStep":
        if cuts < 1:
            raise ConfigError(f"cuts must be at least 1, got {cuts}")
        order_t = tuple(order) if order is not None else tuple(range(cuts))
        spacers_t = tuple(spacers) if spacers is not None else (0,) * cuts
        if sorted(order_t) != list(range(cuts)):
            raise ConfigError(f"order {order_t} is not a permutation of {cuts} slots")
        if len(spacers_t) != cuts or any(s < 0 for s in spacers_t):
            raise ConfigError(f"spacers {spacers_t} must be {cuts} nonnegative counts")
        return cls(cuts, order_t, spacers_t)

    def to_json(self) -> Dict[str, Any]:
        return {"cuts": self.cuts, "order": list(self.order), "spacers": list(self.spacers)}


class RankOneMachine(Transform):
    """Ordered column of equal-measure levels plus unused residual mass

    The map sends each level onto the next one by the order-preserving
    matching; it is undefined on the top level and on the residual.
    """

    def __init__(
        self,
        levels: Sequence[IntervalSet],
        residual: IntervalSet,
        recipe: Sequence[StackStep] = (),
        base: Optional[IntervalSet] = None,
        start: Optional[Sequence[IntervalSet]] = None,
    ):
        self.levels: Tuple[IntervalSet, ...] = tuple(levels)
        self.residual = residual
        self.recipe: Tuple[StackStep, ...] = tuple(recipe)
        self.base = base if base is not None else (levels[0] if levels else IntervalSet.empty())
        # column the recipe is replayed from
        self.start: Tuple[IntervalSet, ...] = tuple(start) if start else (self.base,)
        self._index: Optional[Tuple[List[ExactNumber], List[Tuple[ExactNumber, int]]]] = None

    @classmethod
    def initial(cls, base: Optional[IntervalSet] = None) -> "RankOneMachine":
        """Height-one column on ``base`` (default [0,1)); the rest is residual"""
        base = base if base is not None else IntervalSet.unit()
        return cls([base], base.complement(), (), base)

    @classmethod
    def from_column(cls, levels: Sequence[IntervalSet]) -> "RankOneMachine":
        """Start from a given column; mass outside it is residual"""
        return cls(levels, union_all(levels).complement(), (), levels[0], levels)

    @classmethod
    def replay(
        cls,
        recipe: Sequence[Any],
        base: Optional[IntervalSet] = None,
        start: Optional[Sequence[IntervalSet]] = None,
    ) -> "RankOneMachine":
        machine = cls.from_column(start) if start else cls.initial(base)
        for entry in recipe:
            step = entry if isinstance(entry, StackStep) else StackStep.create(**entry)
            machine = machine.cut_and_stack(step.cuts, step.order, step.spacers)
        return machine

    @classmethod
    def odometer(cls, cuts: int, stages: int) -> "RankOneMachine":
        return cls.replay([StackStep.create(cuts)] * stages)

    @classmethod
    def chacon(cls, stages: int) -> "RankOneMachine":
        """Classical Chacon recipe: three cuts, one spacer over the middle slot"""
        # base of measure 2/3 makes the spacer supply exactly sufficient in the limit
        base = IntervalSet([(0, Fraction(2, 3))])
        return cls.replay([StackStep.create(3, None, (0, 1, 0))] * stages, base)

    @property
    def name(self) -> str:
        return f"rank_one(height={self.height}, stages={len(self.recipe)})"

    @property
    def height(self) -> int:
        return len(self.levels)

    @property
    def width(self) -> ExactNumber:
        return self.levels[0].measure if self.levels else Fraction(0)

    @property
    def top(self) -> IntervalSet:
        return self.levels[-1]

    @property
    def column(self) -> IntervalSet:
        return union_all(self.levels)

    def cut_and_stack(
        self, cuts: int, order: Optional[Sequence[int]] = None, spacers: Optional[Sequence[int]] = None
    ) -> "RankOneMachine":
        step = StackStep.create(cuts, order, spacers)
        sub_width = self.width / step.cuts
        needed = sub_width * sum(step.spacers)
        if needed > self.residual.measure:
            raise InsufficientResidualError(
                f"spacers need measure {needed}, residual has {self.residual.measure}",
                {"needed": needed, "available": self.residual.measure},
            )
        parts = [level.split_measure(step.cuts) for level in self.levels]
        residual = self.residual
        new_levels: List[IntervalSet] = []
        for slot, sub in enumerate(step.order):
            new_levels.extend(part[sub] for part in parts)
            for _ in range(step.spacers[slot]):
                spacer, residual = residual.take_measure(sub_width)
                new_levels.append(spacer)
        logger.debug(
            "cut_and_stack",
            cuts=step.cuts,
            height=len(new_levels),
            residual=str(residual.measure),
        )
        return RankOneMachine(new_levels, residual, self.recipe + (step,), self.base, self.start)

    def build_interval_map(self) -> PiecewiseTranslation:
        branches = []
        for lower, upper in zip(self.levels, self.levels[1:]):
            branches.extend(PiecewiseTranslation.match_sets(lower, upper).branches)
        return PiecewiseTranslation._trusted(branches)

    def level_of(self, x: Any) -> int:
        """Index of the level containing x"""
        if self._index is None:
            entries = sorted(
                ((lo, hi, i) for i, level in enumerate(self.levels) for lo, hi in level),
                key=lambda e: e[0],
            )
            self._index = ([e[0] for e in entries], [(e[1], e[2]) for e in entries])
        los, rest = self._index
        idx = bisect_right(los, x) - 1
        if idx >= 0 and x < rest[idx][0]:
            return rest[idx][1]
        raise UndefinedPointError(f"{x} lies in the residual", point=x)

    def blocks(self, size: int) -> List[IntervalSet]:
        """Unions of ``size`` consecutive levels, from the bottom"""
        return [union_all(self.levels[i : i + size]) for i in range(0, self.height, size)]

    def to_json(self) -> Dict[str, Any]:
        return {
            "kind": "rank_one",
            "base": self.base.to_json(),
            "recipe": [step.to_json() for step in self.recipe],
            "height": self.height,
            "width": exact_to_json(self.width),
            "start": [level.to_json() for level in self.start] if len(self.start) > 1 else None,
        }

    def levels_json(self) -> List[Any]:
        return [level.to_json() for level in self.levels]

    @classmethod
    def from_json(cls, data: Dict[str, Any]) -> "RankOneMachine":
        start = data.get("start")
        return cls.replay(
            data.get("recipe", []),
            IntervalSet.from_json(data["base"]),
            [IntervalSet.from_json(level) for level in start] if start else None,
        )


def cut_and_stack(
    m: RankOneMachine, cuts: int, order: Optional[Sequence[int]] = None, spacers: Optional[Sequence[int]] = None
) -> RankOneMachine:
    return m.cut_and_stack(cuts, order, spacers)
