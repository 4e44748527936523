"""Column coordinates on a rank-one machine

A point of the column is given by its level j and its position, the measure
of level j to the left of it. The machine map keeps the position and raises
the level by one, so a set made of position slices of level runs is a 0/1
grid over (position cell, level), and orbit sums of functions built from
such sets are sliding window sums along the level axis. Window sums are
integers after scaling, so every norm below is exact.
"""

from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from typing import Iterable, List, Sequence, Tuple

import numpy as np

from src.core.errors import PreconditionError
from src.measure.intervals import IntervalSet, union_all
from src.measure.numbers import ExactNumber
from src.transforms.rank_one import RankOneMachine

Rect = Tuple[Fraction, Fraction, int, int]


def level_slice(level: IntervalSet, lo: ExactNumber, hi: ExactNumber) -> IntervalSet:
    """Points of ``level`` whose position lies in [lo, hi)"""
    if lo == 0 and hi == level.measure:
        return level
    return level.take_measure(hi)[0] - level.take_measure(lo)[0]


def _row_index(edges: Sequence[Fraction], fine: Sequence[Fraction]) -> List[int]:
    """For each cell of ``fine``, the cell of ``edges`` containing it"""
    out: List[int] = []
    c = 0
    for lo in fine[:-1]:
        while edges[c + 1] <= lo:
            c += 1
        out.append(c)
    return out


@dataclass(frozen=True, eq=False)
class ColumnGrid:
    edges: Tuple[Fraction, ...]
    mask: np.ndarray

    @classmethod
    def empty(cls, machine: RankOneMachine) -> "ColumnGrid":
        return cls((Fraction(0), Fraction(machine.width)), np.zeros((1, machine.height), dtype=bool))

    @classmethod
    def from_rects(cls, machine: RankOneMachine, rects: Iterable[Rect]) -> "ColumnGrid":
        """Union of rectangles (pos_lo, pos_hi, first_level, stop_level)"""
        rects = list(rects)
        width = Fraction(machine.width)
        cuts = {Fraction(0), width}
        for lo, hi, start, stop in rects:
            if not 0 <= lo <= hi <= width or not 0 <= start <= stop <= machine.height:
                raise PreconditionError(
                    "rectangle outside the machine column",
                    {"rect": (str(lo), str(hi), start, stop), "height": machine.height},
                )
            cuts.update((Fraction(lo), Fraction(hi)))
        edges = tuple(sorted(cuts))
        mask = np.zeros((len(edges) - 1, machine.height), dtype=bool)
        for lo, hi, start, stop in rects:
            for c in range(len(edges) - 1):
                if lo <= edges[c] and edges[c + 1] <= hi:
                    mask[c, start:stop] = True
        return cls(edges, mask)

    @property
    def height(self) -> int:
        return int(self.mask.shape[1])

    @property
    def widths(self) -> List[Fraction]:
        return [b - a for a, b in zip(self.edges, self.edges[1:])]

    def refine(self, edges: Sequence[Fraction]) -> "ColumnGrid":
        if tuple(edges) == self.edges:
            return self
        return ColumnGrid(tuple(edges), self.mask[_row_index(self.edges, edges)])

    def _aligned(self, other: "ColumnGrid") -> Tuple[np.ndarray, np.ndarray, Tuple[Fraction, ...]]:
        edges = tuple(sorted(set(self.edges) | set(other.edges)))
        return self.refine(edges).mask, other.refine(edges).mask, edges

    def __or__(self, other: "ColumnGrid") -> "ColumnGrid":
        a, b, edges = self._aligned(other)
        return ColumnGrid(edges, a | b)

    def __and__(self, other: "ColumnGrid") -> "ColumnGrid":
        a, b, edges = self._aligned(other)
        return ColumnGrid(edges, a & b)

    def __sub__(self, other: "ColumnGrid") -> "ColumnGrid":
        a, b, edges = self._aligned(other)
        return ColumnGrid(edges, a & ~b)

    def complement(self) -> "ColumnGrid":
        """Complement within the column"""
        return ColumnGrid(self.edges, ~self.mask)

    @property
    def measure(self) -> Fraction:
        counts = self.mask.sum(axis=1)
        return sum((w * int(k) for w, k in zip(self.widths, counts)), Fraction(0))

    def stay(self, n: int) -> "ColumnGrid":
        """Points x with x, tau x, ..., tau^n x all in the set and inside the column"""
        h = self.height
        out = np.zeros_like(self.mask)
        if n < h:
            cs = np.concatenate([np.zeros((self.mask.shape[0], 1), dtype=np.int64), np.cumsum(self.mask, axis=1)], axis=1)
            out[:, : h - n] = (cs[:, n + 1 :] - cs[:, : h - n]) == n + 1
        return ColumnGrid(self.edges, out)

    def preimage(self) -> "ColumnGrid":
        """Points whose image under tau lies in the set"""
        out = np.zeros_like(self.mask)
        out[:, :-1] = self.mask[:, 1:]
        return ColumnGrid(self.edges, out)

    def image(self) -> "ColumnGrid":
        """tau of the set; the top level has no image"""
        out = np.zeros_like(self.mask)
        out[:, 1:] = self.mask[:, :-1]
        return ColumnGrid(self.edges, out)

    def to_interval_set(self, machine: RankOneMachine) -> IntervalSet:
        pieces: List[IntervalSet] = []
        c = 0
        rows = len(self.edges) - 1
        while c < rows:
            # merge neighbouring cells with identical rows
            d = c + 1
            while d < rows and np.array_equal(self.mask[d], self.mask[c]):
                d += 1
            lo, hi = self.edges[c], self.edges[d]
            for j in np.flatnonzero(self.mask[c]):
                pieces.append(level_slice(machine.levels[int(j)], lo, hi))
            c = d
        return union_all(pieces)


@dataclass(frozen=True, eq=False)
class ColumnFunction:
    """values / scale on each (cell, level); the function is constant off the column"""

    edges: Tuple[Fraction, ...]
    values: np.ndarray
    scale: int

    @classmethod
    def combine(cls, terms: Sequence[Tuple[ExactNumber, ColumnGrid]], constant: ExactNumber = 0) -> "ColumnFunction":
        """constant + sum of coeff * indicator over the column"""
        if not terms:
            raise PreconditionError("a column function needs at least one set")
        coeffs = [Fraction(c) for c, _ in terms]
        constant = Fraction(constant)
        scale = lcm(constant.denominator, *(c.denominator for c in coeffs))
        edges = tuple(sorted(set().union(*(set(g.edges) for _, g in terms))))
        values = np.full((len(edges) - 1, terms[0][1].height), int(constant * scale), dtype=np.int64)
        for c, (_, grid) in zip(coeffs, terms):
            values += grid.refine(edges).mask.astype(np.int64) * int(c * scale)
        return cls(edges, values, scale)

    @property
    def widths(self) -> List[Fraction]:
        return [b - a for a, b in zip(self.edges, self.edges[1:])]

    def window_sums(self, n: int) -> np.ndarray:
        """scale * S_n on levels 0..H-n, the levels where tau^(n-1) is defined"""
        h = self.values.shape[1]
        if n < 1 or n > h:
            return np.zeros((self.values.shape[0], 0), dtype=np.int64)
        cs = np.concatenate([np.zeros((self.values.shape[0], 1), dtype=np.int64), np.cumsum(self.values, axis=1)], axis=1)
        return cs[:, n:] - cs[:, : h - n + 1]

    def l1_norm(self, n: int) -> Fraction:
        """||S_n g||_1 over the points of the column where S_n is defined"""
        sums = np.abs(self.window_sums(n)).sum(axis=1)
        total = sum((w * int(s) for w, s in zip(self.widths, sums)), Fraction(0))
        return total / self.scale

    def sup_norm(self, n: int) -> Fraction:
        sums = self.window_sums(n)
        if sums.size == 0:
            return Fraction(0)
        return Fraction(int(np.abs(sums).max()), self.scale)
