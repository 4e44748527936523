"""Base class for measure-preserving transformations"""

from abc import ABC, abstractmethod
from functools import cached_property
from typing import Any, Dict

from src.measure.intervals import IntervalSet
from src.measure.numbers import ExactNumber
from src.transforms.interval_map import PiecewiseTranslation


class Transform(ABC):
    """A measure-preserving map of [0,1), possibly partial

    Subclasses provide the exact interval-map representation; orbit
    evaluation, set images and the undefined region derive from it.
    """

    @property
    @abstractmethod
    def name(self) -> str:
        """Return the name of this transformation"""
        pass

    @abstractmethod
    def build_interval_map(self) -> PiecewiseTranslation:
        """Exact representation as a piecewise translation of [0,1)"""
        pass

    @abstractmethod
    def to_json(self) -> Dict[str, Any]:
        """Serializable description"""
        pass

    @cached_property
    def interval_map(self) -> PiecewiseTranslation:
        return self.build_interval_map()

    @cached_property
    def inverse_map(self) -> PiecewiseTranslation:
        return self.interval_map.inverse()

    @property
    def domain(self) -> IntervalSet:
        return self.interval_map.domain

    @property
    def undefined_region(self) -> IntervalSet:
        return self.domain.complement()

    @property
    def is_total(self) -> bool:
        return not self.undefined_region

    def apply(self, x: Any) -> Any:
        return self.interval_map.apply(x)

    def apply_inverse(self, x: Any) -> Any:
        return self.inverse_map.apply(x)

    def defined_at(self, x: ExactNumber) -> bool:
        return self.interval_map.defined_at(x)

    def pushforward(self, s: IntervalSet) -> IntervalSet:
        return self.interval_map.pushforward(s)

    def pullback(self, s: IntervalSet) -> IntervalSet:
        return self.interval_map.pullback(s)

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.name})"


class ExplicitMap(Transform):
    """A transformation given directly by its branches"""

    def __init__(self, tmap: PiecewiseTranslation, label: str = "interval_map"):
        self._map = tmap
        self.label = label

    @property
    def name(self) -> str:
        return self.label

    def build_interval_map(self) -> PiecewiseTranslation:
        return self._map

    def to_json(self) -> Dict[str, Any]:
        return {"kind": "interval_map", "label": self.label, "branches": self._map.to_json()}
