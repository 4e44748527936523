"""Balanced uniform partitions of a set for a bounded function

A partition is eps-balanced and uniform when the exceptional set E is small,
f keeps its mean on the rest exactly, f oscillates by less than eps on each
cell and all cells have the same measure 1/n.
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from math import ceil, floor
from typing import Any, Dict, List, Optional, Sequence, Tuple

from tenacity import Retrying, before_sleep_log, retry_if_exception_type, stop_after_attempt

from src.config.settings import Settings, get_settings
from src.core.errors import BalanceNotFoundError, PreconditionError, VerificationError
from src.diophantine.approximation import Approximation, find_approximation
from src.measure.intervals import IntervalSet, split_pieces, union_all
from src.measure.numbers import ExactNumber, exact_floor, exact_to_json, format_exact
from src.measure.polynomials import Observable, PiecewisePolynomial, as_polynomial, poly_extrema
from src.measure.sources import FunctionSource
from src.stacking.checkers import check_pub
from src.utils.logging import get_logger

logger = get_logger(__name__)

MAX_BISECTIONS = 40


def bins_for_eps(eps: Fraction) -> int:
    """Least m with 2/m < eps"""
    return floor(2 / eps) + 1


@dataclass
class PUBPartition:
    region: IntervalSet
    eps: Fraction
    m: int
    n: int
    cells: List[IntervalSet]
    cell_class: List[int]
    exceptional: IntervalSet
    classes: Dict[int, IntervalSet] = field(default_factory=dict)
    approximation: Optional[Approximation] = None

    @property
    def width(self) -> Fraction:
        return Fraction(1, self.n)

    @property
    def q(self) -> int:
        return self.n - 1

    def cell_integrals(self, f: Observable) -> List[ExactNumber]:
        g = as_polynomial(f)
        return [g.integral_over(cell) for cell in self.cells]

    def oscillations(self, f: Observable) -> List[ExactNumber]:
        g = as_polynomial(f)
        return [g.oscillation(cell) for cell in self.cells]

    def to_json(self) -> Dict[str, Any]:
        return {
            "region": self.region.to_json(),
            "eps": exact_to_json(self.eps),
            "m": self.m,
            "n": self.n,
            "cells": [cell.to_json() for cell in self.cells],
            "cell_class": self.cell_class,
            "exceptional": self.exceptional.to_json(),
            "approximation": self.approximation.to_json() if self.approximation else None,
        }


def _check_inputs(src: Observable, f: PiecewisePolynomial, A: IntervalSet, eps: Fraction) -> None:
    if not 0 < eps < 1:
        raise PreconditionError(f"eps must lie in (0,1), got {eps}")
    if not A:
        raise PreconditionError("cannot partition an empty set")
    finite = not src.infinitely_valued if isinstance(src, FunctionSource) else f.restrict(A).degree <= 0
    if finite:
        raise PreconditionError(
            "function takes finitely many values; step functions are handled by the step-coboundary constructions"
        )
    lo, hi = f.range_over(A) or (0, 0)
    if lo < -1 or hi > 1:
        raise PreconditionError(
            "normalize the function so that its values lie in [-1, 1]",
            {"inf": format_exact(lo), "sup": format_exact(hi)},
        )


def value_classes(f: PiecewisePolynomial, A: IntervalSet, eps: Fraction, m: int) -> Dict[int, IntervalSet]:
    """Sets A_i where the value bin [-1 + i/m, -1 + (i+1)/m) holds, cut finely enough

    Every bin of the cut oscillates by less than (eps - 1/m)/2, so the values
    on a class stay within an interval shorter than eps.
    """
    tol = (eps - Fraction(1, m)) / 2
    found: Dict[int, List[Tuple[ExactNumber, ExactNumber]]] = {}
    for lo, hi in A:
        stack = [(a, b, c, 0) for a, b, c in f.segments(lo, hi)]
        while stack:
            a, b, c, depth = stack.pop()
            low, high = poly_extrema(c, a, b) if c else (Fraction(0), Fraction(0))
            if high - low < tol:
                index = min(max(exact_floor((low + 1) * m), 0), 2 * m - 1)
                found.setdefault(index, []).append((a, b))
                continue
            if depth >= MAX_BISECTIONS:
                raise PreconditionError(
                    f"function cannot be refined to oscillation below {format_exact(tol)}",
                    {"interval": (format_exact(a), format_exact(b))},
                )
            mid = (a + b) / 2
            stack.append((mid, b, c, depth + 1))
            stack.append((a, mid, c, depth + 1))
    return {i: IntervalSet._trusted(found[i]) for i in sorted(found)}


def _q_floor(classes: Dict[int, IntervalSet], eps: Fraction, A: IntervalSet, N: int) -> int:
    """Denominator leaving room in E for half a cell per class and two balancing cells

    Retries double it, so three attempts reach the worst case of a full cell
    per class.
    """
    pA = A.measure
    slack = ceil((len(classes) + 4) / (2 * eps * pA))
    tall = ceil(2 * N / ((1 - eps) * pA)) + 1
    return max(slack, tall, 2)


def _value_cells(f: PiecewisePolynomial, s: IntervalSet, k: int) -> List[IntervalSet]:
    """k cells of equal measure cut from the pieces of ``s`` sorted by the value of f"""
    pieces = [(a, b) for lo, hi in s for a, b, _ in f.segments(lo, hi)]
    pieces.sort(key=lambda p: (f.evaluate((p[0] + p[1]) / 2), p[0]))
    return split_pieces(pieces, k)


def _approximate(measures: Sequence[ExactNumber], m: int, q_min: int, settings: Settings) -> Tuple[Approximation, List[int]]:
    inner = [x for x in measures if x < 1]
    if not inner:
        return Approximation(q=q_min, p=[], errors=[], exponent=2 * m), [q_min] * len(measures)
    q_max = max(settings.approximation_q_max, 4 * q_min)
    approx = find_approximation(inner, 2 * m, q_max=q_max, q_min=q_min, settings=settings)
    p = iter(approx.p)
    return approx, [next(p) if x < 1 else approx.q for x in measures]


class _Balancer:
    """Carves the exceptional set so that f keeps its mean on the rest"""

    def __init__(self, f: PiecewisePolynomial, A: IntervalSet, classes: Dict[int, IntervalSet], n: int):
        self.f = f
        self.classes = classes
        self.n = n
        self.mean = f.integral_over(A) / A.measure
        self.measures = {i: s.measure for i, s in classes.items()}
        self.centers: Dict[int, ExactNumber] = {}
        self.ranges: Dict[int, Tuple[ExactNumber, ExactNumber]] = {}
        for i, s in classes.items():
            lo, hi = f.range_over(s) or (Fraction(0), Fraction(0))
            self.ranges[i] = (lo, hi)
            self.centers[i] = (lo + hi) / 2

    def _place(self, i: int, b: ExactNumber, running: ExactNumber) -> Tuple[IntervalSet, ExactNumber]:
        """Left or right end of A_i of measure b, whichever keeps the imbalance smaller"""
        s = self.classes[i]
        if b == 0:
            return IntervalSet.empty(), Fraction(0)
        left = s.take_measure(b)[0]
        right = s.take_measure(self.measures[i] - b)[1]
        options = [(left, self.f.integral_over(left) - self.mean * b), (right, self.f.integral_over(right) - self.mean * b)]
        return min(options, key=lambda o: abs(running + o[1]))

    def carve(self, counts: Dict[int, int], anchor: int, limit: ExactNumber) -> Optional[Dict[int, IntervalSet]]:
        counts = dict(counts)
        n = self.n
        while True:
            pieces: Dict[int, IntervalSet] = {}
            running: ExactNumber = Fraction(0)
            mass: ExactNumber = Fraction(0)
            for i in self.classes:
                if i == anchor:
                    continue
                b = self.measures[i] - Fraction(counts[i], n)
                pieces[i], delta = self._place(i, b, running)
                running = running + delta
                mass = mass + b
            b0 = self.measures[anchor] - Fraction(counts[anchor], n)
            if mass + b0 >= limit:
                return None
            need = self.mean * b0 - running
            window = self._window(anchor, b0, need)
            if window is not None:
                pieces[anchor] = window
                return pieces
            lo, hi = self.ranges[anchor]
            gap = self._gap(need, b0, lo, hi)
            # either grow the anchor window or move one more cell of another class into E
            grown = self._gap(need + self.mean / n, b0 + Fraction(1, n), lo, hi)
            best, best_gap = anchor, grown
            for j in self.classes:
                if j == anchor or counts[j] == 0:
                    continue
                shifted = self._gap(need - (self.centers[j] - self.mean) / n, b0, lo, hi)
                if abs(shifted) < abs(best_gap):
                    best, best_gap = j, shifted
            if best == anchor and counts[anchor] == 0:
                return None
            if best != anchor and abs(best_gap) >= abs(gap) and counts[anchor] > 0:
                best = anchor
            counts[best] -= 1

    @staticmethod
    def _gap(need: ExactNumber, b0: ExactNumber, lo: ExactNumber, hi: ExactNumber) -> ExactNumber:
        if need < b0 * lo:
            return need - b0 * lo
        if need > b0 * hi:
            return need - b0 * hi
        return Fraction(0)

    def _window(self, anchor: int, b0: ExactNumber, need: ExactNumber) -> Optional[IntervalSet]:
        if b0 == 0:
            return IntervalSet.empty() if need == 0 else None
        for lo, hi in self.classes[anchor]:
            u = self.f.window_position(lo, hi, b0, need)
            if u is not None:
                return IntervalSet._trusted([(u, u + b0)])
        return None


def _carve(
    f: PiecewisePolynomial,
    A: IntervalSet,
    eps: Fraction,
    m: int,
    classes: Dict[int, IntervalSet],
    p: Sequence[int],
    n: int,
    approximation: Approximation,
) -> PUBPartition:
    balancer = _Balancer(f, A, classes, n)
    counts = {i: max(0, min(pi, exact_floor(n * balancer.measures[i]))) for i, pi in zip(classes, p)}
    limit = eps * A.measure
    anchors = sorted(classes, key=lambda i: (abs(balancer.centers[i] - balancer.mean), -balancer.measures[i], i))
    for anchor in anchors[:3]:
        pieces = balancer.carve(counts, anchor, limit)
        if pieces is None:
            continue
        cells: List[IntervalSet] = []
        cell_class: List[int] = []
        for i, s in classes.items():
            rest = s - pieces[i]
            k = exact_floor(rest.measure * n)
            if k:
                cells.extend(_value_cells(f, rest, k))
                cell_class.extend([i] * k)
        return PUBPartition(
            region=A,
            eps=eps,
            m=m,
            n=n,
            cells=cells,
            cell_class=cell_class,
            exceptional=union_all(pieces.values()),
            classes=classes,
            approximation=approximation,
        )
    raise BalanceNotFoundError(
        f"no balancing exceptional set with measure below {format_exact(limit)} at n={n}",
        {"n": n, "classes": len(classes)},
    )


def pub_partitions(
    specs: Sequence[Tuple[Observable, IntervalSet]],
    eps: Any,
    N: int = 0,
    settings: Optional[Settings] = None,
    q_min: Optional[int] = None,
) -> List[PUBPartition]:
    """PUB(eps) partitions sharing one denominator n, from a single joint approximation"""
    settings = settings or get_settings()
    eps = Fraction(eps)
    functions = [as_polynomial(src) for src, _ in specs]
    for (src, A), f in zip(specs, functions):
        _check_inputs(src, f, A, eps)
    m = bins_for_eps(eps)
    all_classes = [value_classes(f, A, eps, m) for f, (_, A) in zip(functions, specs)]
    floor_q = max([_q_floor(c, eps, A, N) for c, (_, A) in zip(all_classes, specs)] + [q_min or 0])

    for attempt in Retrying(
        retry=retry_if_exception_type(BalanceNotFoundError),
        stop=stop_after_attempt(settings.retry_attempts),
        before_sleep=before_sleep_log(logger, logging.WARNING),
        reraise=True,
    ):
        with attempt:
            start = floor_q * 2 ** (attempt.retry_state.attempt_number - 1)
            measures = [s.measure for classes in all_classes for s in classes.values()]
            approximation, p = _approximate(measures, m, start, settings)
            n = approximation.q + 1
            partitions: List[PUBPartition] = []
            offset = 0
            for f, (_, A), classes in zip(functions, specs, all_classes):
                share = p[offset : offset + len(classes)]
                offset += len(classes)
                partitions.append(_carve(f, A, eps, m, classes, share, n, approximation))

    for f, partition in zip(functions, partitions):
        report = check_pub(f, partition)
        if not report.ok:
            raise VerificationError("PUB partition failed its condition check", report.failed())
        logger.info(
            "pub_partition_built",
            m=m,
            n=partition.n,
            cells=len(partition.cells),
            exceptional=format_exact(partition.exceptional.measure),
        )
    return partitions


def pub_partition(
    src: Observable, A: IntervalSet, eps: Any, N: int = 0, settings: Optional[Settings] = None
) -> PUBPartition:
    return pub_partitions([(src, A)], eps, N, settings)[0]
