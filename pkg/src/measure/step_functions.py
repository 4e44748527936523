"""Step functions on [0,1) with exact breakpoints and values"""

from __future__ import annotations

from bisect import bisect_right
from fractions import Fraction
from typing import TYPE_CHECKING, Any, Callable, Dict, Iterable, List, Optional, Sequence, Tuple, Union

import mpmath
from sympy import integer_nthroot

from src.core.errors import ConfigError, IntervalError
from src.measure.intervals import ONE, ZERO, IntervalSet, interval_set
from src.measure.numbers import (
    ExactNumber,
    QuadIrrational,
    as_exact,
    exact_from_json,
    exact_to_json,
    sqrt_exact,
    to_mpf,
)

if TYPE_CHECKING:
    from src.transforms.interval_map import PiecewiseTranslation

Atom = Tuple[ExactNumber, ExactNumber, ExactNumber]
Norm = Union[ExactNumber, mpmath.mpf]
INF = "inf"


def _merge_atoms(atoms: Iterable[Atom]) -> List[Atom]:
    out: List[Atom] = []
    for lo, hi, value in atoms:
        if not value or not lo < hi:
            continue
        if out and out[-1][1] == lo and out[-1][2] == value:
            out[-1] = (out[-1][0], hi, value)
        else:
            out.append((lo, hi, value))
    return out


def _cover(atoms: Sequence[Atom]) -> List[Atom]:
    """Atoms padded with zero-valued gaps so that they tile [0,1)"""
    out: List[Atom] = []
    cursor: ExactNumber = ZERO
    for lo, hi, value in atoms:
        if cursor < lo:
            out.append((cursor, lo, ZERO))
        out.append((lo, hi, value))
        cursor = hi
    if cursor < ONE:
        out.append((cursor, ONE, ZERO))
    return out


class StepFunction:
    """Finitely-valued function, zero off a finite union of intervals

    Stored as sorted atoms ``(lo, hi, value)`` with nonzero values and adjacent
    equal values merged; ``pieces`` regroups them by value.
    """

    __slots__ = ("_atoms", "_los")

    def __init__(self, atoms: Iterable[Tuple[Any, Any, Any]] = ()):
        ordered = sorted(
            ((as_exact(lo), as_exact(hi), as_exact(v)) for lo, hi, v in atoms),
            key=lambda atom: atom[0],
        )
        for (_, hi, _), (lo, _, _) in zip(ordered, ordered[1:]):
            if lo < hi:
                raise IntervalError("step function atoms overlap")
        self._atoms: Tuple[Atom, ...] = tuple(_merge_atoms(ordered))
        self._los = [lo for lo, _, _ in self._atoms]

    @classmethod
    def _trusted(cls, atoms: Iterable[Atom]) -> "StepFunction":
        obj = cls.__new__(cls)
        obj._atoms = tuple(_merge_atoms(atoms))
        obj._los = [lo for lo, _, _ in obj._atoms]
        return obj

    @classmethod
    def zero(cls) -> "StepFunction":
        return cls._trusted([])

    @classmethod
    def constant(cls, value: Any, support: Optional[IntervalSet] = None) -> "StepFunction":
        return cls.indicator(support or IntervalSet.unit(), value)

    @classmethod
    def indicator(cls, s: IntervalSet, value: Any = 1) -> "StepFunction":
        v = as_exact(value)
        return cls._trusted([(lo, hi, v) for lo, hi in s])

    @classmethod
    def from_pieces(cls, pieces: Iterable[Tuple[IntervalSet, Any]]) -> "StepFunction":
        """Build from (support, value) pairs with pairwise disjoint supports"""
        atoms: List[Atom] = []
        for support, value in pieces:
            v = as_exact(value)
            atoms.extend((lo, hi, v) for lo, hi in support)
        return cls(atoms)

    # Views

    @property
    def atoms(self) -> Tuple[Atom, ...]:
        return self._atoms

    @property
    def pieces(self) -> List[Tuple[IntervalSet, ExactNumber]]:
        """(support, value) pairs with distinct values, ordered by first occurrence"""
        groups: Dict[ExactNumber, List[Tuple[ExactNumber, ExactNumber]]] = {}
        for lo, hi, value in self._atoms:
            groups.setdefault(value, []).append((lo, hi))
        return [(IntervalSet._trusted(ivs), value) for value, ivs in groups.items()]

    @property
    def support(self) -> IntervalSet:
        return IntervalSet._trusted([(lo, hi) for lo, hi, _ in self._atoms])

    def values(self) -> List[ExactNumber]:
        return list(dict.fromkeys(v for _, _, v in self._atoms))

    def breakpoints(self) -> List[ExactNumber]:
        points: List[ExactNumber] = []
        for lo, hi, _ in self._atoms:
            if not points or points[-1] != lo:
                points.append(lo)
            points.append(hi)
        return points

    def __len__(self) -> int:
        return len(self._atoms)

    def __eq__(self, other: Any) -> bool:
        if not isinstance(other, StepFunction):
            return NotImplemented
        return self._atoms == other._atoms

    def __hash__(self) -> int:
        return hash(self._atoms)

    def __repr__(self) -> str:
        return f"StepFunction({len(self._atoms)} atoms)"

    # Evaluation and integration

    def evaluate(self, x: Any) -> ExactNumber:
        idx = bisect_right(self._los, x) - 1
        if idx >= 0 and x < self._atoms[idx][1]:
            return self._atoms[idx][2]
        return ZERO

    __call__ = evaluate

    def integral(self) -> ExactNumber:
        total: ExactNumber = ZERO
        for lo, hi, value in self._atoms:
            total = total + value * (hi - lo)
        return total

    def integral_over(self, s: IntervalSet) -> ExactNumber:
        return self.restrict(s).integral()

    def restrict(self, s: IntervalSet) -> "StepFunction":
        """Multiply by the indicator of ``s``"""
        out: List[Atom] = []
        cuts = s.intervals
        j = 0
        for lo, hi, value in self._atoms:
            while j < len(cuts) and cuts[j][1] <= lo:
                j += 1
            k = j
            while k < len(cuts) and cuts[k][0] < hi:
                a, b = max(lo, cuts[k][0]), min(hi, cuts[k][1])
                if a < b:
                    out.append((a, b, value))
                k += 1
        return StepFunction._trusted(out)

    # Algebra

    def combine(
        self, other: "StepFunction", op: Callable[[ExactNumber, ExactNumber], ExactNumber]
    ) -> "StepFunction":
        """Pointwise ``op`` over the common refinement of both breakpoint sets"""
        a, b = _cover(self._atoms), _cover(other._atoms)
        out: List[Atom] = []
        i = j = 0
        cursor: ExactNumber = ZERO
        while i < len(a) and j < len(b):
            end = min(a[i][1], b[j][1])
            out.append((cursor, end, op(a[i][2], b[j][2])))
            cursor = end
            if a[i][1] == end:
                i += 1
            if b[j][1] == end:
                j += 1
        return StepFunction._trusted(out)

    def __add__(self, other: "StepFunction") -> "StepFunction":
        return self.combine(other, lambda x, y: x + y)

    def __sub__(self, other: "StepFunction") -> "StepFunction":
        return self.combine(other, lambda x, y: x - y)

    def __mul__(self, other: Any) -> "StepFunction":
        if isinstance(other, StepFunction):
            return self.combine(other, lambda x, y: x * y)
        return self.scale(other)

    __rmul__ = __mul__

    def __neg__(self) -> "StepFunction":
        return StepFunction._trusted([(lo, hi, -v) for lo, hi, v in self._atoms])

    def __abs__(self) -> "StepFunction":
        return StepFunction._trusted([(lo, hi, abs(v)) for lo, hi, v in self._atoms])

    def scale(self, c: Any) -> "StepFunction":
        k = as_exact(c)
        return StepFunction._trusted([(lo, hi, v * k) for lo, hi, v in self._atoms])

    def shift_values(self, c: Any, region: Optional[IntervalSet] = None) -> "StepFunction":
        """Add the constant ``c`` on ``region`` (default [0,1))"""
        return self + StepFunction.indicator(region or IntervalSet.unit(), c)

    def compose(self, t: "PiecewiseTranslation") -> "StepFunction":
        """f∘t on the domain of ``t``; zero off that domain"""
        out: List[Atom] = []
        atoms = self._atoms
        j = 0
        # images of the branches are disjoint, so one pass over the atoms suffices
        for lo, hi, shift in sorted(t.branches, key=lambda br: br[0] + br[2]):
            a_lo, a_hi = lo + shift, hi + shift
            while j < len(atoms) and atoms[j][1] <= a_lo:
                j += 1
            k = j
            while k < len(atoms) and atoms[k][0] < a_hi:
                a, b = max(atoms[k][0], a_lo), min(atoms[k][1], a_hi)
                if a < b:
                    out.append((a - shift, b - shift, atoms[k][2]))
                k += 1
        return StepFunction._trusted(sorted(out, key=lambda atom: atom[0]))

    def translate(self, shift: Any) -> "StepFunction":
        return StepFunction._trusted([(lo + shift, hi + shift, v) for lo, hi, v in self._atoms])

    # Norms

    def sup_norm(self) -> ExactNumber:
        best: ExactNumber = ZERO
        for _, _, value in self._atoms:
            if abs(value) > best:
                best = abs(value)
        return best

    def argmax_abs(self) -> Optional[ExactNumber]:
        """Left endpoint of the first atom attaining the sup norm"""
        best: ExactNumber = ZERO
        witness: Optional[ExactNumber] = None
        for lo, _, value in self._atoms:
            if abs(value) > best:
                best, witness = abs(value), lo
        return witness

    def lr_norm(self, r: Any, region: Optional[IntervalSet] = None) -> Norm:
        f = self.restrict(region) if region is not None else self
        if r == INF or r == float("inf"):
            return f.sup_norm()
        exponent = Fraction(r)
        if exponent < 1:
            raise ConfigError(f"L_r norm requires r >= 1, got {r}")
        if exponent == 1:
            return abs(f).integral()
        if exponent.denominator == 1 and exponent.numerator % 2 == 0:
            n = exponent.numerator
            total: ExactNumber = ZERO
            for lo, hi, value in f._atoms:
                total = total + value**n * (hi - lo)
            return _even_root(total, n)
        with mpmath.workdps(60):
            power = mpmath.mpf(exponent.numerator) / exponent.denominator
            acc = mpmath.mpf(0)
            for lo, hi, value in f._atoms:
                acc += abs(to_mpf(value)) ** power * to_mpf(hi - lo)
            return acc ** (1 / power)

    # Serialization

    def to_json(self) -> List[Dict[str, Any]]:
        return [
            {"support": support.to_json(), "value": exact_to_json(value)}
            for support, value in self.pieces
        ]

    @classmethod
    def from_json(cls, data: Sequence[Dict[str, Any]]) -> "StepFunction":
        return cls.from_pieces(
            (IntervalSet.from_json(item["support"]), exact_from_json(item["value"])) for item in data
        )


def _even_root(total: ExactNumber, n: int) -> Norm:
    if isinstance(total, Fraction):
        num, num_exact = integer_nthroot(total.numerator, n)
        den, den_exact = integer_nthroot(total.denominator, n)
        if num_exact and den_exact:
            return Fraction(int(num), int(den))
        if n == 2:
            return sqrt_exact(total)
    with mpmath.workdps(60):
        return to_mpf(total) ** (mpmath.mpf(1) / n)


def step_function(raw: Iterable[Sequence[Any]]) -> StepFunction:
    """Build from ``[[lo, hi, value], ...]`` with endpoints validated in [0,1]"""
    atoms: List[Atom] = []
    for item in raw:
        if len(item) != 3:
            raise IntervalError(f"expected [lo, hi, value], got {item!r}")
        interval_set([item[:2]])
        atoms.append((as_exact(item[0]), as_exact(item[1]), as_exact(item[2])))
    return StepFunction(atoms)


def lr_norm(f: StepFunction, r: Any, region: Optional[IntervalSet] = None) -> Norm:
    return f.lr_norm(r, region)


def evaluate(f: StepFunction, x: Any) -> ExactNumber:
    return f.evaluate(as_exact(x))


def is_exact_norm(value: Norm) -> bool:
    return isinstance(value, (Fraction, QuadIrrational))
