"""Partial piecewise translations of [0,1)

Every transformation in the workbench is ultimately represented as a finite
list of branches ``(lo, hi, shift)``: points of ``[lo, hi)`` move to
``x + shift``. Domains are pairwise disjoint and so are images, which makes the
map injective and measure-preserving on its domain.
"""

from __future__ import annotations

from bisect import bisect_right
from fractions import Fraction
from typing import Any, Iterable, List, Sequence, Tuple

from src.core.errors import ConstructionError, PreconditionError, UndefinedPointError
from src.measure.intervals import IntervalSet
from src.measure.numbers import ExactNumber, as_exact, exact_from_json, exact_to_json

Branch = Tuple[ExactNumber, ExactNumber, ExactNumber]


def _merge_branches(branches: Iterable[Branch]) -> List[Branch]:
    out: List[Branch] = []
    for lo, hi, shift in sorted((b for b in branches if b[0] < b[1]), key=lambda b: b[0]):
        if out and out[-1][1] == lo and out[-1][2] == shift:
            out[-1] = (out[-1][0], hi, shift)
        else:
            out.append((lo, hi, shift))
    return out


class PiecewiseTranslation:
    """Injective partial map x -> x + shift on finitely many intervals"""

    __slots__ = ("_branches", "_los")

    def __init__(self, branches: Iterable[Tuple[Any, Any, Any]] = ()):
        merged = _merge_branches((as_exact(lo), as_exact(hi), as_exact(s)) for lo, hi, s in branches)
        for (_, hi, _), (lo, _, _) in zip(merged, merged[1:]):
            if lo < hi:
                raise ConstructionError("translation branches overlap")
        self._branches: Tuple[Branch, ...] = tuple(merged)
        self._los = [b[0] for b in self._branches]

    @classmethod
    def _trusted(cls, branches: Iterable[Branch]) -> "PiecewiseTranslation":
        obj = cls.__new__(cls)
        obj._branches = tuple(_merge_branches(branches))
        obj._los = [b[0] for b in obj._branches]
        return obj

    @classmethod
    def identity(cls, domain: IntervalSet | None = None) -> "PiecewiseTranslation":
        domain = domain if domain is not None else IntervalSet.unit()
        return cls._trusted([(lo, hi, Fraction(0)) for lo, hi in domain])

    @classmethod
    def from_rotation(cls, alpha: Any) -> "PiecewiseTranslation":
        """x -> x + alpha mod 1 for alpha in [0, 1)"""
        a = as_exact(alpha)
        if a < 0 or a >= 1:
            raise PreconditionError(f"rotation number must lie in [0,1), got {a}")
        return cls._trusted([(Fraction(0), 1 - a, a), (1 - a, Fraction(1), a - 1)])

    @classmethod
    def match_sets(cls, src: IntervalSet, dst: IntervalSet) -> "PiecewiseTranslation":
        """Order-preserving translation carrying ``src`` onto ``dst`` (equal measures)"""
        if src.measure != dst.measure:
            raise ConstructionError(
                "cannot match sets of different measure",
                {"src": src.measure, "dst": dst.measure},
            )
        out: List[Branch] = []
        a, b = list(src.intervals), list(dst.intervals)
        i = j = 0
        a_lo = a[0][0] if a else None
        b_lo = b[0][0] if b else None
        while i < len(a) and j < len(b):
            width = min(a[i][1] - a_lo, b[j][1] - b_lo)
            out.append((a_lo, a_lo + width, b_lo - a_lo))
            a_lo, b_lo = a_lo + width, b_lo + width
            if a_lo == a[i][1]:
                i += 1
                if i < len(a):
                    a_lo = a[i][0]
            if b_lo == b[j][1]:
                j += 1
                if j < len(b):
                    b_lo = b[j][0]
        return cls._trusted(out)

    # Views

    @property
    def branches(self) -> Tuple[Branch, ...]:
        return self._branches

    @property
    def domain(self) -> IntervalSet:
        return IntervalSet._trusted([(lo, hi) for lo, hi, _ in self._branches])

    @property
    def image(self) -> IntervalSet:
        return IntervalSet._trusted([(lo + s, hi + s) for lo, hi, s in self._branches])

    def __len__(self) -> int:
        return len(self._branches)

    def __eq__(self, other: Any) -> bool:
        if not isinstance(other, PiecewiseTranslation):
            return NotImplemented
        return self._branches == other._branches

    def __hash__(self) -> int:
        return hash(self._branches)

    def __repr__(self) -> str:
        return f"PiecewiseTranslation({len(self._branches)} branches)"

    # Evaluation

    def defined_at(self, x: Any) -> bool:
        idx = bisect_right(self._los, x) - 1
        return idx >= 0 and x < self._branches[idx][1]

    def apply(self, x: Any) -> ExactNumber:
        idx = bisect_right(self._los, x) - 1
        if idx < 0 or not x < self._branches[idx][1]:
            raise UndefinedPointError(f"map undefined at {x}", point=x)
        return x + self._branches[idx][2]

    __call__ = apply

    def inverse(self) -> "PiecewiseTranslation":
        return PiecewiseTranslation._trusted([(lo + s, hi + s, -s) for lo, hi, s in self._branches])

    def pushforward(self, s: IntervalSet) -> IntervalSet:
        if not s.issubset(self.domain):
            raise UndefinedPointError("set meets the undefined region of the map")
        return self._move(s)

    def pullback(self, s: IntervalSet) -> IntervalSet:
        """Preimage of ``s`` (points of the domain landing in ``s``)"""
        return self.inverse()._move(s)

    def _move(self, s: IntervalSet) -> IntervalSet:
        return self.restrict(s).image

    def restrict(self, s: IntervalSet) -> "PiecewiseTranslation":
        """The same map with domain cut down to ``s``"""
        out: List[Branch] = []
        for cut_lo, cut_hi in s:
            for lo, hi, shift in self._meeting(cut_lo, cut_hi):
                out.append((max(lo, cut_lo), min(hi, cut_hi), shift))
        return PiecewiseTranslation._trusted(out)

    def _meeting(self, lo: ExactNumber, hi: ExactNumber) -> Iterable[Branch]:
        """Branches whose domain meets [lo, hi)"""
        k = max(bisect_right(self._los, lo) - 1, 0)
        branches = self._branches
        while k < len(branches) and branches[k][0] < hi:
            if branches[k][1] > lo:
                yield branches[k]
            k += 1

    def compose(self, inner: "PiecewiseTranslation") -> "PiecewiseTranslation":
        """self∘inner, defined where inner is defined and lands in self's domain"""
        out: List[Branch] = []
        for lo, hi, s in inner._branches:
            img_lo, img_hi = lo + s, hi + s
            for a, b, t in self._meeting(img_lo, img_hi):
                out.append((max(img_lo, a) - s, min(img_hi, b) - s, s + t))
        return PiecewiseTranslation._trusted(out)

    def power(self, n: int) -> "PiecewiseTranslation":
        if n < 0:
            return self.inverse().power(-n)
        result = PiecewiseTranslation.identity()
        base = self
        while n:
            if n & 1:
                result = base.compose(result)
            base = base.compose(base)
            n >>= 1
        return result

    def to_json(self) -> List[List[Any]]:
        return [[exact_to_json(lo), exact_to_json(hi), exact_to_json(s)] for lo, hi, s in self._branches]

    @classmethod
    def from_json(cls, data: Sequence[Sequence[Any]]) -> "PiecewiseTranslation":
        return cls((exact_from_json(lo), exact_from_json(hi), exact_from_json(s)) for lo, hi, s in data)
