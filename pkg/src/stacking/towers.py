"""Balanced uniform towers built from PUB partitions

A tower is stored as columns of equal-width strips; the tower map sends
each strip onto the next one of its column by the order-preserving
matching. Cells of the partition are stacked in greedy order and every cell
is cut into strips, consecutive levels taking their strips in alternating
order so that position errors cancel in pairs along a column.
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from math import ceil
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union, overload

from tenacity import Retrying, before_sleep_log, retry_if_exception_type, stop_after_attempt

from src.config.settings import Settings, get_settings
from src.core.errors import GapNotFoundError, PreconditionError, VerificationError
from src.measure.intervals import IntervalSet, union_all
from src.measure.numbers import ExactNumber, exact_to_json, format_exact
from src.measure.polynomials import Observable, PiecewisePolynomial, as_polynomial
from src.stacking.checkers import ConditionReport, check_tub, check_wtub
from src.stacking.greedy import greedy_order
from src.stacking.partition import PUBPartition, pub_partitions
from src.transforms.interval_map import PiecewiseTranslation
from src.utils.logging import get_logger

logger = get_logger(__name__)

MAX_STRIPS = 64
WEAK_MULTIPLIER = 3

Column = List[IntervalSet]


@dataclass
class StripTower:
    columns: List[Column]
    width: ExactNumber

    @property
    def heights(self) -> List[int]:
        return [len(c) for c in self.columns]

    @property
    def height(self) -> int:
        return max(self.heights, default=0)

    def level(self, i: int) -> IntervalSet:
        return union_all(c[i] for c in self.columns if i < len(c))

    @property
    def levels(self) -> List[IntervalSet]:
        return [self.level(i) for i in range(self.height)]

    @property
    def support(self) -> IntervalSet:
        return union_all(strip for c in self.columns for strip in c)

    @property
    def top(self) -> IntervalSet:
        return union_all(c[-1] for c in self.columns if c)

    @property
    def bottom(self) -> IntervalSet:
        return union_all(c[0] for c in self.columns if c)

    def interval_map(self) -> PiecewiseTranslation:
        branches = []
        for column in self.columns:
            for lower, upper in zip(column, column[1:]):
                branches.extend(PiecewiseTranslation.match_sets(lower, upper).branches)
        return PiecewiseTranslation(branches)

    def swap_tails(self, c1: int, c2: int, level: int) -> "StripTower":
        """Exchange the parts of two columns from ``level`` upwards"""
        columns = [list(c) for c in self.columns]
        a, b = columns[c1], columns[c2]
        columns[c1], columns[c2] = a[:level] + b[level:], b[:level] + a[level:]
        return StripTower(columns, self.width)

    def to_json(self) -> Dict[str, Any]:
        return {
            "width": exact_to_json(self.width),
            "heights": self.heights,
            "columns": [[strip.to_json() for strip in column] for column in self.columns],
        }


def arrange_strips(cells: Sequence[IntervalSet], strips: int) -> List[Column]:
    """Columns through stacked cells, cell k cut into ``strips`` strips

    Column c takes strip c of even levels and strip strips-1-c of odd ones.
    """
    parts = [cell.split_measure(strips) for cell in cells]
    return [
        [part[c if k % 2 == 0 else strips - 1 - c] for k, part in enumerate(parts)]
        for c in range(strips)
    ]


def transfer_on_columns(f: PiecewisePolynomial, columns: Sequence[Column]) -> PiecewisePolynomial:
    """g with g = 0 on each bottom strip and g(next strip) = g - f along each column"""
    atoms = []
    for column in columns:
        acc = PiecewisePolynomial.zero()
        for strip in column:
            atoms.extend(acc.place(strip).atoms)
            acc = acc - f.profile(strip)
    return PiecewisePolynomial(atoms)


# Level refinement


@dataclass
class RefineResult:
    tower: StripTower
    swaps: List[Tuple[int, int, int]]
    initial_spread: ExactNumber
    spread: ExactNumber
    full_sum: ExactNumber
    eps: Fraction

    @property
    def satisfied(self) -> bool:
        return self.full_sum < self.eps

    def to_json(self) -> Dict[str, Any]:
        return {
            "swaps": [list(s) for s in self.swaps],
            "initial_spread": exact_to_json(self.initial_spread),
            "spread": exact_to_json(self.spread),
            "full_sum": exact_to_json(self.full_sum),
            "satisfied": self.satisfied,
        }


class _Sums:
    """Prefix sum profiles of f along every column"""

    def __init__(self, f: PiecewisePolynomial, tower: StripTower):
        self.window = IntervalSet.span(0, tower.width)
        self.prefix: List[List[PiecewisePolynomial]] = []
        for column in tower.columns:
            acc = PiecewisePolynomial.zero()
            rows = [acc]
            for strip in column:
                acc = acc + f.profile(strip)
                rows.append(acc)
            self.prefix.append(rows)

    def full(self, c: int) -> PiecewisePolynomial:
        return self.prefix[c][-1]

    def bounds(self, p: PiecewisePolynomial) -> Tuple[ExactNumber, ExactNumber]:
        return p.range_over(self.window) or (Fraction(0), Fraction(0))

    def swapped(self, c1: int, c2: int, j: int) -> Tuple[PiecewisePolynomial, PiecewisePolynomial]:
        p1, p2 = self.prefix[c1], self.prefix[c2]
        return p1[j] + (p2[-1] - p2[j]), p2[j] + (p1[-1] - p1[j])

    def swap(self, c1: int, c2: int, j: int) -> None:
        p1, p2 = self.prefix[c1], self.prefix[c2]
        self.prefix[c1] = p1[: j + 1] + [p1[j] + (q - p2[j]) for q in p2[j + 1 :]]
        self.prefix[c2] = p2[: j + 1] + [p2[j] + (q - p1[j]) for q in p1[j + 1 :]]


def _potential(ranges: Dict[int, Tuple[ExactNumber, ExactNumber]], groups: Dict[int, List[int]]) -> ExactNumber:
    total: ExactNumber = Fraction(0)
    for members in groups.values():
        total = total + max(ranges[c][1] for c in members) - min(ranges[c][0] for c in members)
    return total


def _spread(ranges: Dict[int, Tuple[ExactNumber, ExactNumber]]) -> ExactNumber:
    if not ranges:
        return Fraction(0)
    return max(r[1] for r in ranges.values()) - min(r[0] for r in ranges.values())


def _worst(ranges: Dict[int, Tuple[ExactNumber, ExactNumber]]) -> ExactNumber:
    return max((max(abs(lo), abs(hi)) for lo, hi in ranges.values()), default=Fraction(0))


def level_refine(tower: StripTower, f: Observable, eps: Any, max_iters: int = 64) -> RefineResult:
    """Swap column tails until every full column sum is below eps

    Only columns of equal height exchange tails. A swap is taken when it
    strictly lowers the summed spread of the full sums within height groups;
    the search stops at the first pass without such a swap.
    """
    g = as_polynomial(f)
    eps = Fraction(eps)
    sums = _Sums(g, tower)
    ranges = {c: sums.bounds(sums.full(c)) for c in range(len(tower.columns))}
    groups: Dict[int, List[int]] = {}
    for c, h in enumerate(tower.heights):
        groups.setdefault(h, []).append(c)
    initial = _spread(ranges)
    swaps: List[Tuple[int, int, int]] = []

    while len(swaps) < max_iters and _worst(ranges) >= eps:
        current = _potential(ranges, groups)
        best: Optional[Tuple[ExactNumber, int, int, int, Tuple[Any, Any]]] = None
        for h, members in groups.items():
            if len(members) < 2:
                continue
            c1 = max(members, key=lambda c: ranges[c][1])
            c2 = min(members, key=lambda c: ranges[c][0])
            if c1 == c2:
                continue
            for j in range(1, h):
                n1, n2 = sums.swapped(c1, c2, j)
                trial = dict(ranges)
                trial[c1], trial[c2] = sums.bounds(n1), sums.bounds(n2)
                value = _potential(trial, groups)
                if value < current and (best is None or value < best[0]):
                    best = (value, c1, c2, j, (trial[c1], trial[c2]))
        if best is None:
            break
        _, c1, c2, j, (r1, r2) = best
        tower = tower.swap_tails(c1, c2, j)
        sums.swap(c1, c2, j)
        ranges[c1], ranges[c2] = r1, r2
        swaps.append((c1, c2, j))

    result = RefineResult(tower, swaps, initial, _spread(ranges), _worst(ranges), eps)
    logger.debug("level_refined", swaps=len(swaps), spread=format_exact(result.spread))
    return result


# TUB towers


@dataclass
class TUBTower:
    region: IntervalSet
    eps: Fraction
    N: int
    tower: StripTower
    partition: PUBPartition
    order: List[int]
    strips: int
    width_bound: bool = False
    refinement: Optional[RefineResult] = None
    report: Optional[ConditionReport] = None

    @property
    def height(self) -> int:
        return self.tower.height

    @property
    def width(self) -> ExactNumber:
        return self.tower.width

    @property
    def levels(self) -> List[IntervalSet]:
        return self.tower.levels

    @property
    def support(self) -> IntervalSet:
        return self.tower.support

    @property
    def top(self) -> IntervalSet:
        return self.tower.top

    def interval_map(self) -> PiecewiseTranslation:
        return self.tower.interval_map()

    def to_json(self) -> Dict[str, Any]:
        return {
            "eps": exact_to_json(self.eps),
            "N": self.N,
            "width_bound": self.width_bound,
            "height": self.height,
            "strips": self.strips,
            "n": self.partition.n,
            "width": exact_to_json(self.width),
            "coverage": exact_to_json(self.support.measure),
            "refinement": self.refinement.to_json() if self.refinement else None,
            "report": self.report.to_json() if self.report else None,
        }


def _require_mean_zero(f: PiecewisePolynomial, A: IntervalSet) -> None:
    if f.integral_over(A) != 0:
        raise PreconditionError(
            "tower constructions need a function with zero integral over its set",
            {"integral": format_exact(f.integral_over(A))},
        )


def _initial_strips(partition: PUBPartition, f: PiecewisePolynomial) -> int:
    """Power of two s with the summed cell oscillation over s below 2 eps - max oscillation

    A full column sum varies across its strip by at most the summed
    oscillation of the levels divided by s; builds that still fail their
    check double s.
    """
    oscillations = partition.oscillations(f)
    osc = max(oscillations, default=Fraction(0))
    total = sum(oscillations, Fraction(0))
    need = ceil(total / (2 * partition.eps - osc)) if total else 1
    s = 1
    while s < need and s < MAX_STRIPS:
        s *= 2
    return s


def _tub_for(
    f: PiecewisePolynomial, partition: PUBPartition, N: int, strips: int, max_iters: int, width_bound: bool = False
) -> TUBTower:
    order = greedy_order(partition.cell_integrals(f))
    cells = [partition.cells[i] for i in order]
    tower = StripTower(arrange_strips(cells, strips), partition.width / strips)
    refined = level_refine(tower, f, partition.eps, max_iters)
    tub = TUBTower(
        region=partition.region,
        eps=partition.eps,
        N=N,
        tower=refined.tower,
        partition=partition,
        order=order,
        strips=strips,
        width_bound=width_bound,
        refinement=refined,
    )
    tub.report = check_tub(f, tub)
    return tub


@overload
def tub_build(
    src: Observable,
    A: IntervalSet,
    eps: Any,
    N: int,
    paired_with: None = None,
    settings: Optional[Settings] = None,
    width_bound: bool = False,
) -> TUBTower: ...


@overload
def tub_build(
    src: Observable,
    A: IntervalSet,
    eps: Any,
    N: int,
    paired_with: Tuple[Observable, IntervalSet],
    settings: Optional[Settings] = None,
    width_bound: bool = False,
) -> Tuple[TUBTower, TUBTower]: ...


def tub_build(
    src: Observable,
    A: IntervalSet,
    eps: Any,
    N: int,
    paired_with: Optional[Tuple[Observable, IntervalSet]] = None,
    settings: Optional[Settings] = None,
    width_bound: bool = False,
) -> Union[TUBTower, Tuple[TUBTower, TUBTower]]:
    """TUB(eps, h) tower with h > N; with ``paired_with`` two towers of one width

    Paired towers share the denominator n of a single joint approximation
    and the same strip count, so their strips have equal measure. For them,
    and whenever ``width_bound`` is set, N bounds the denominator instead of
    the height: n > N, heights free.
    """
    settings = settings or get_settings()
    eps = Fraction(eps)
    specs = [(src, A)] + ([paired_with] if paired_with is not None else [])
    if paired_with is not None and not A.isdisjoint(paired_with[1]):
        raise PreconditionError("paired towers need disjoint sets")
    width_bound = width_bound or paired_with is not None
    functions = [as_polynomial(s) for s, _ in specs]
    for g, (_, region) in zip(functions, specs):
        _require_mean_zero(g, region)
    if width_bound:
        partitions = pub_partitions(specs, eps, 0, settings, q_min=N)
    else:
        partitions = pub_partitions(specs, eps, N, settings)
    strips = max(_initial_strips(p, g) for p, g in zip(partitions, functions))

    while True:
        towers = [
            _tub_for(g, p, N, strips, 4 * strips * max(len(p.cells), 1), width_bound)
            for g, p in zip(functions, partitions)
        ]
        if all(t.report.ok for t in towers if t.report):
            break
        if strips >= MAX_STRIPS:
            failed = next(t.report for t in towers if t.report and not t.report.ok)
            raise VerificationError("TUB tower failed its condition check", failed.failed())
        strips *= 2
        logger.debug("tub_strips_doubled", strips=strips)

    for t in towers:
        logger.info(
            "tub_built",
            height=t.height,
            strips=t.strips,
            width=format_exact(t.width),
            coverage=format_exact(t.support.measure),
        )
    if paired_with is None:
        return towers[0]
    return towers[0], towers[1]


# W-TUB towers


@dataclass
class WTUBTower:
    region: IntervalSet
    eps: Fraction
    N: int
    tower: StripTower
    partition: PUBPartition
    order: List[int]
    strips: int
    tamping: Dict[str, Any] = field(default_factory=dict)
    M: int = WEAK_MULTIPLIER
    refinement: Optional[RefineResult] = None
    report: Optional[ConditionReport] = None

    @property
    def heights(self) -> List[int]:
        return sorted(set(self.tower.heights))

    @property
    def width(self) -> ExactNumber:
        return self.tower.width

    @property
    def support(self) -> IntervalSet:
        return self.tower.support

    @property
    def top(self) -> IntervalSet:
        return self.tower.top

    def interval_map(self) -> PiecewiseTranslation:
        return self.tower.interval_map()

    def to_json(self) -> Dict[str, Any]:
        return {
            "eps": exact_to_json(self.eps),
            "N": self.N,
            "M": self.M,
            "heights": self.heights,
            "strips": self.strips,
            "n": self.partition.n,
            "width": exact_to_json(self.width),
            "coverage": exact_to_json(self.support.measure),
            "tamping": self.tamping,
            "refinement": self.refinement.to_json() if self.refinement else None,
            "report": self.report.to_json() if self.report else None,
        }


def _tamping_pair(
    f: PiecewisePolynomial, cells: Sequence[IntervalSet]
) -> Optional[Tuple[int, IntervalSet, IntervalSet, ExactNumber]]:
    """Level k >= 1 and thirds D1, D2 of it with f < f - gap between D1 and D2

    D1 is the lower-valued of the left and right thirds of the level.
    """
    best = None
    for k, cell in enumerate(cells):
        if k == 0:
            continue
        left, _, right = cell.split_measure(3)
        lo1, hi1 = f.range_over(left) or (Fraction(0), Fraction(0))
        lo2, hi2 = f.range_over(right) or (Fraction(0), Fraction(0))
        gap = max(lo2 - hi1, lo1 - hi2)
        if gap > 0 and (best is None or gap > best[3]):
            d1, d2 = (left, right) if hi1 < lo2 else (right, left)
            best = (k, d1, d2, gap)
    return best


def _thirds(
    cells: Sequence[IntervalSet], tamp: Optional[Tuple[int, IntervalSet, IntervalSet]] = None
) -> List[Column]:
    """Columns of heights h-1, h, h+1 from a column of h cells cut into thirds

    Odd levels hand their thirds out in reverse order. With ``tamp`` the
    sub-columns holding D1 and D2 at that level exchange them. The bottom
    piece of the first sub-column moves to the top of the last one.
    """
    parts = [cell.split_measure(3) for cell in cells]
    subs = [[p[t if k % 2 == 0 else 2 - t] for k, p in enumerate(parts)] for t in range(3)]
    if tamp is not None:
        level, d1, d2 = tamp
        for sub in subs:
            if sub[level] == d1:
                sub[level] = d2
            elif sub[level] == d2:
                sub[level] = d1
    left, middle, right = subs
    return [left[1:], middle, right + [left[0]]]


def _imbalance(f: PiecewisePolynomial, columns: Sequence[Column]) -> ExactNumber:
    """Largest |integral of f| over a sub-column"""
    return max(abs(sum((f.integral_over(piece) for piece in column), Fraction(0))) for column in columns)


def _wtub_for(
    f: PiecewisePolynomial, partition: PUBPartition, N: int, strips: int
) -> WTUBTower:
    integrals = partition.cell_integrals(f)
    first = min(range(len(integrals)), key=lambda i: (abs(integrals[i]), i))
    rest = [i for i in range(len(integrals)) if i != first]
    tail = greedy_order([integrals[i] for i in rest], start=integrals[first])
    order = [first] + [rest[i] for i in tail]
    cells = [partition.cells[i] for i in order]
    pair = _tamping_pair(f, cells)
    if pair is None:
        raise GapNotFoundError(
            "no level with separated left and right value ranges", {"n": partition.n}
        )
    level, d1, d2, gap = pair

    # exchanging D1 and D2 moves at least gap * p(D1) of integral between the outer sub-columns
    subs = _thirds(cells)
    tamped = _thirds(cells, (level, d1, d2))
    before, after = _imbalance(f, subs), _imbalance(f, tamped)
    swapped = after < before
    if swapped:
        subs = tamped

    columns: List[Column] = []
    for sub in subs:
        columns.extend(arrange_strips(sub, strips))
    tower = StripTower(columns, partition.width / (3 * strips))
    refined = level_refine(tower, f, partition.eps, max_iters=4 * len(columns) * len(cells))
    wtub = WTUBTower(
        region=partition.region,
        eps=partition.eps,
        N=N,
        tower=refined.tower,
        partition=partition,
        order=order,
        strips=strips,
        tamping={
            "level": level,
            "D1": d1.to_json(),
            "D2": d2.to_json(),
            "gap": exact_to_json(gap),
            "swapped": swapped,
            "imbalance": exact_to_json(after if swapped else before),
        },
        refinement=refined,
    )
    wtub.report = check_wtub(f, wtub)
    return wtub


def wtub_build(
    src: Observable, A: IntervalSet, eps: Any, N: int, settings: Optional[Settings] = None
) -> WTUBTower:
    """W-TUB(eps, 3, h, 3) tower: three sub-towers of heights h, h+1, h+2 and equal widths

    With c cells in the greedy column the sub-towers have c-1, c and c+1
    levels, so h = c - 1. One level's left and right thirds D1, D2 are
    exchanged between the outer sub-towers when that lowers their integral
    imbalance.
    """
    settings = settings or get_settings()
    eps = Fraction(eps)
    if not 0 < eps < 1:
        raise PreconditionError(f"eps must lie in (0,1), got {eps}")
    f = as_polynomial(src)
    _require_mean_zero(f, A)

    q_min: Optional[int] = None
    for attempt in Retrying(
        retry=retry_if_exception_type(GapNotFoundError),
        stop=stop_after_attempt(settings.retry_attempts),
        before_sleep=before_sleep_log(logger, logging.WARNING),
        reraise=True,
    ):
        with attempt:
            # the cells stay above N after the bottom third moves
            (partition,) = pub_partitions([(src, A)], eps, N + 2, settings, q_min=q_min)
            if attempt.retry_state.attempt_number > 1:
                logger.info("wtub_refined", n=partition.n)
            q_min = 2 * partition.n
            strips = _initial_strips(partition, f)
            while True:
                wtub = _wtub_for(f, partition, N, strips)
                if wtub.report is not None and wtub.report.ok:
                    break
                if strips >= MAX_STRIPS:
                    raise VerificationError(
                        "W-TUB tower failed its condition check",
                        wtub.report.failed() if wtub.report else {},
                    )
                strips *= 2

    logger.info(
        "wtub_built",
        heights=wtub.heights,
        strips=wtub.strips,
        width=format_exact(wtub.width),
        gap=wtub.tamping["gap"],
    )
    return wtub
