"""Finite unions of half-open intervals with exact endpoints"""

from __future__ import annotations

from bisect import bisect_right
from fractions import Fraction
from typing import Any, Iterable, Iterator, List, Sequence, Tuple

from src.core.errors import IntervalError
from src.measure.numbers import ExactNumber, as_exact, exact_from_json, exact_to_json

Interval = Tuple[ExactNumber, ExactNumber]

ZERO = Fraction(0)
ONE = Fraction(1)


def _normalize(intervals: Iterable[Interval]) -> List[Interval]:
    items = sorted(((lo, hi) for lo, hi in intervals if lo < hi), key=lambda iv: iv[0])
    merged: List[Interval] = []
    for lo, hi in items:
        if merged and lo <= merged[-1][1]:
            if hi > merged[-1][1]:
                merged[-1] = (merged[-1][0], hi)
        else:
            merged.append((lo, hi))
    return merged


class IntervalSet:
    """Disjoint, sorted, merged union of intervals [lo, hi)

    Instances are immutable; every operation returns a new set.
    """

    __slots__ = ("_intervals", "_los")

    def __init__(self, intervals: Iterable[Tuple[Any, Any]] = ()):
        self._intervals: Tuple[Interval, ...] = tuple(
            _normalize((as_exact(lo), as_exact(hi)) for lo, hi in intervals)
        )
        self._los = [lo for lo, _ in self._intervals]

    @classmethod
    def _trusted(cls, intervals: List[Interval]) -> "IntervalSet":
        obj = cls.__new__(cls)
        obj._intervals = tuple(_normalize(intervals))
        obj._los = [lo for lo, _ in obj._intervals]
        return obj

    @classmethod
    def empty(cls) -> "IntervalSet":
        return cls._trusted([])

    @classmethod
    def unit(cls) -> "IntervalSet":
        return cls._trusted([(ZERO, ONE)])

    @classmethod
    def span(cls, lo: Any, hi: Any) -> "IntervalSet":
        return cls([(lo, hi)])

    @property
    def intervals(self) -> Tuple[Interval, ...]:
        return self._intervals

    def __iter__(self) -> Iterator[Interval]:
        return iter(self._intervals)

    def __len__(self) -> int:
        return len(self._intervals)

    def __bool__(self) -> bool:
        return bool(self._intervals)

    def __eq__(self, other: Any) -> bool:
        if not isinstance(other, IntervalSet):
            return NotImplemented
        return self._intervals == other._intervals

    def __hash__(self) -> int:
        return hash(self._intervals)

    def __repr__(self) -> str:
        body = ", ".join(f"[{lo}, {hi})" for lo, hi in self._intervals)
        return f"IntervalSet({{{body}}})"

    @property
    def measure(self) -> ExactNumber:
        total: ExactNumber = ZERO
        for lo, hi in self._intervals:
            total = total + (hi - lo)
        return total

    @property
    def lower(self) -> ExactNumber:
        return self._intervals[0][0]

    @property
    def upper(self) -> ExactNumber:
        return self._intervals[-1][1]

    def contains(self, x: Any) -> bool:
        idx = bisect_right(self._los, x) - 1
        return idx >= 0 and x < self._intervals[idx][1]

    __contains__ = contains

    # Set algebra

    def union(self, other: "IntervalSet") -> "IntervalSet":
        return IntervalSet._trusted(list(self._intervals) + list(other._intervals))

    __or__ = union

    def intersection(self, other: "IntervalSet") -> "IntervalSet":
        out: List[Interval] = []
        a, b = self._intervals, other._intervals
        i = j = 0
        while i < len(a) and j < len(b):
            lo = max(a[i][0], b[j][0])
            hi = min(a[i][1], b[j][1])
            if lo < hi:
                out.append((lo, hi))
            if a[i][1] < b[j][1]:
                i += 1
            else:
                j += 1
        return IntervalSet._trusted(out)

    __and__ = intersection

    def difference(self, other: "IntervalSet") -> "IntervalSet":
        out: List[Interval] = []
        cuts = other._intervals
        j = 0
        for lo, hi in self._intervals:
            cursor = lo
            while j < len(cuts) and cuts[j][1] <= cursor:
                j += 1
            k = j
            while k < len(cuts) and cuts[k][0] < hi:
                if cuts[k][0] > cursor:
                    out.append((cursor, cuts[k][0]))
                cursor = max(cursor, cuts[k][1])
                if cursor >= hi:
                    break
                k += 1
            if cursor < hi:
                out.append((cursor, hi))
        return IntervalSet._trusted(out)

    __sub__ = difference

    def complement(self) -> "IntervalSet":
        return IntervalSet.unit().difference(self)

    def symmetric_difference(self, other: "IntervalSet") -> "IntervalSet":
        return self.difference(other).union(other.difference(self))

    def isdisjoint(self, other: "IntervalSet") -> bool:
        return not self.intersection(other)

    def issubset(self, other: "IntervalSet") -> bool:
        return not self.difference(other)

    def translate(self, shift: Any) -> "IntervalSet":
        """Shift every endpoint by ``shift`` (no wrapping)"""
        return IntervalSet._trusted([(lo + shift, hi + shift) for lo, hi in self._intervals])

    # Carving

    def take_measure(self, mu: Any) -> Tuple["IntervalSet", "IntervalSet"]:
        """Split into (leftmost part of measure mu, rest)"""
        if mu < 0 or mu > self.measure:
            raise IntervalError(f"cannot take measure {mu} from a set of measure {self.measure}")
        taken: List[Interval] = []
        rest: List[Interval] = []
        remaining = as_exact(mu)
        for lo, hi in self._intervals:
            if remaining <= 0:
                rest.append((lo, hi))
                continue
            width = hi - lo
            if width <= remaining:
                taken.append((lo, hi))
                remaining = remaining - width
            else:
                taken.append((lo, lo + remaining))
                rest.append((lo + remaining, hi))
                remaining = ZERO
        return IntervalSet._trusted(taken), IntervalSet._trusted(rest)

    def split_measure(self, parts: int) -> List["IntervalSet"]:
        """Cut into ``parts`` consecutive pieces of equal measure, left to right"""
        return split_pieces(self._intervals, parts)

    def split_at(self, x: Any) -> Tuple["IntervalSet", "IntervalSet"]:
        """(part below x, part at or above x)"""
        left = IntervalSet._trusted([(lo, min(hi, x)) for lo, hi in self._intervals if lo < x])
        right = IntervalSet._trusted([(max(lo, x), hi) for lo, hi in self._intervals if hi > x])
        return left, right

    def measure_below(self, x: Any) -> ExactNumber:
        return self.split_at(x)[0].measure

    def point_at_measure(self, mu: Any) -> ExactNumber:
        """Point y in the set with measure(self ∩ [0, y)) = mu"""
        remaining = as_exact(mu)
        for lo, hi in self._intervals:
            if remaining < hi - lo:
                return lo + remaining
            remaining = remaining - (hi - lo)
        if remaining == 0 and self._intervals:
            return self._intervals[-1][1]
        raise IntervalError(f"measure {mu} exceeds set measure {self.measure}")

    def breakpoints(self) -> List[ExactNumber]:
        points: List[ExactNumber] = []
        for lo, hi in self._intervals:
            points.extend((lo, hi))
        return points

    def to_json(self) -> List[List[Any]]:
        return [[exact_to_json(lo), exact_to_json(hi)] for lo, hi in self._intervals]

    @classmethod
    def from_json(cls, data: Sequence[Sequence[Any]]) -> "IntervalSet":
        return interval_set([(exact_from_json(lo), exact_from_json(hi)) for lo, hi in data])


def split_pieces(pieces: Sequence[Interval], parts: int) -> List[IntervalSet]:
    """Cut disjoint pieces, taken in the given order, into ``parts`` sets of equal measure"""
    if parts < 1:
        raise IntervalError("parts must be at least 1")
    total = sum((hi - lo for lo, hi in pieces), ZERO)
    if total == 0:
        return [IntervalSet.empty() for _ in range(parts)]
    share = total / parts
    out: List[IntervalSet] = []
    current: List[Interval] = []
    room = share
    for lo, hi in pieces:
        while len(out) < parts - 1 and hi - lo >= room:
            current.append((lo, lo + room))
            out.append(IntervalSet._trusted(current))
            current, lo, room = [], lo + room, share
        if lo < hi:
            current.append((lo, hi))
            room = room - (hi - lo)
    out.append(IntervalSet._trusted(current))
    return out


def interval_set(raw: Iterable[Sequence[Any]]) -> IntervalSet:
    """Validate endpoint pairs in [0,1] and return the normalized union"""
    pairs: List[Interval] = []
    for item in raw:
        if len(item) != 2:
            raise IntervalError(f"expected an endpoint pair, got {item!r}")
        lo, hi = as_exact(item[0]), as_exact(item[1])
        for endpoint in (lo, hi):
            if endpoint < 0 or endpoint > 1:
                raise IntervalError(f"endpoint {endpoint} outside [0,1]")
        if hi < lo:
            raise IntervalError(f"interval [{lo}, {hi}) has hi < lo")
        pairs.append((lo, hi))
    return IntervalSet._trusted(pairs)


def union_all(sets: Iterable[IntervalSet]) -> IntervalSet:
    intervals: List[Interval] = []
    for s in sets:
        intervals.extend(s.intervals)
    return IntervalSet._trusted(intervals)


def measure(s: IntervalSet) -> ExactNumber:
    return s.measure
