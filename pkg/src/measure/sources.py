"""Lazily refinable function sources"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Optional, Tuple

from src.core.errors import ConfigError, PreconditionError
from src.measure.intervals import IntervalSet
from src.measure.numbers import ExactNumber, as_exact, format_exact
from src.measure.step_functions import StepFunction


@dataclass(frozen=True)
class FunctionSource:
    """A function given by a base step function and an optional refiner

    ``kind`` selects the built-in family: ``affine`` (a*x + b), ``square``
    (x**2) or ``step`` (user step data, no refiner). Refinements use dyadic
    multiples of ``base_bins`` so that successive refinements nest.
    """

    kind: str
    base: StepFunction
    slope: Fraction = Fraction(0)
    intercept: Fraction = Fraction(0)
    base_bins: int = 1
    name: str = ""
    params: Dict[str, Any] = field(default_factory=dict)

    @property
    def infinitely_valued(self) -> bool:
        return self.kind == "square" or (self.kind == "affine" and self.slope != 0)

    @property
    def resolution(self) -> ExactNumber:
        """Largest gap between consecutive breakpoints of the base"""
        if self.kind != "step":
            return Fraction(1, self.base_bins)
        points = [Fraction(0)] + self.base.breakpoints() + [Fraction(1)]
        gaps = [b - a for a, b in zip(points, points[1:])]
        return max(gaps)

    @property
    def lipschitz(self) -> ExactNumber:
        """Bound on |f(x) - f(y)| / |x - y| over [0,1)"""
        if self.kind == "square":
            return Fraction(2)
        return abs(self.slope)

    def bins_for(self, delta: Any) -> int:
        """Dyadic bin count whose bins are at most delta wide and oscillate by less than delta"""
        delta = as_exact(delta)
        if delta <= 0:
            raise ConfigError(f"refinement resolution must be positive, got {delta}")
        n = self.base_bins
        lip = self.lipschitz
        while Fraction(1, n) > delta or lip / n >= delta:
            n *= 2
        return n

    def refine(self, delta: Any) -> StepFunction:
        if self.kind == "step":
            if as_exact(delta) >= self.resolution:
                return self.base
            raise PreconditionError(
                f"step source {self.name!r} has no refiner below resolution {self.resolution}",
                {"delta": delta},
            )
        return self._binned(self.bins_for(delta))

    def _binned(self, n: int) -> StepFunction:
        atoms: List[Tuple[Fraction, Fraction, Fraction]] = []
        for k in range(n):
            mid = Fraction(2 * k + 1, 2 * n)
            atoms.append((Fraction(k, n), Fraction(k + 1, n), self._value_at(mid)))
        return StepFunction._trusted(atoms)

    def _value_at(self, x: Any) -> Any:
        if self.kind == "square":
            return x * x
        return self.slope * x + self.intercept

    def evaluate(self, x: Any) -> ExactNumber:
        if self.kind == "step":
            return self.base.evaluate(x)
        return self._value_at(as_exact(x))

    def integral(self) -> ExactNumber:
        return self.integral_over(IntervalSet.unit())

    def integral_over(self, s: IntervalSet) -> ExactNumber:
        if self.kind == "step":
            return self.base.integral_over(s)
        total: ExactNumber = Fraction(0)
        for lo, hi in s:
            if self.kind == "square":
                total = total + (hi**3 - lo**3) / 3
            else:
                total = total + self.slope * (hi * hi - lo * lo) / 2 + self.intercept * (hi - lo)
        return total

    def bounds(self) -> Tuple[ExactNumber, ExactNumber]:
        """(inf, sup) of the function over [0,1)"""
        if self.kind == "square":
            return Fraction(0), Fraction(1)
        if self.kind == "affine":
            ends = (self.intercept, self.slope + self.intercept)
            return min(ends), max(ends)
        values = self.base.values()
        if self.base.support.measure < 1:
            values.append(Fraction(0))
        return min(values), max(values)

    def describe(self) -> str:
        if self.kind == "square":
            return "x^2"
        if self.kind == "affine":
            return f"{format_exact(self.slope)}*x+{format_exact(self.intercept)}"
        return self.name or f"step[{len(self.base.pieces)} pieces]"


def affine_source(slope: Any = 1, intercept: Any = 0, base_bins: int = 4) -> FunctionSource:
    a, b = Fraction(slope), Fraction(intercept)
    src = FunctionSource("affine", StepFunction.zero(), a, b, base_bins, name="affine")
    return FunctionSource("affine", src._binned(base_bins), a, b, base_bins, name="affine")


def square_source(base_bins: int = 4) -> FunctionSource:
    src = FunctionSource("square", StepFunction.zero(), base_bins=base_bins, name="square")
    return FunctionSource("square", src._binned(base_bins), base_bins=base_bins, name="square")


def step_source(f: StepFunction, name: str = "step") -> FunctionSource:
    return FunctionSource("step", f, name=name)


def refine(src: FunctionSource, delta: Any) -> StepFunction:
    return src.refine(delta)


def source_from_config(kind: str, params: Optional[Dict[str, Any]] = None) -> FunctionSource:
    """Named families used by experiment documents"""
    params = params or {}
    bins = int(params.get("base_bins", 4))
    if kind == "identity":
        return affine_source(1, 0, bins)
    if kind == "centered":
        return affine_source(1, Fraction(-1, 2), bins)
    if kind == "affine":
        return affine_source(params.get("slope", 1), params.get("intercept", 0), bins)
    if kind == "square":
        return square_source(bins)
    raise ConfigError(f"unknown function family {kind!r}")
