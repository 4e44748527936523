"""Independent re-checks of the defining inequalities of partitions and towers

The checkers only read the finished sets (cells, strips, columns) and the
function; they share no bookkeeping with the constructors.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import TYPE_CHECKING, Any, Dict, List, Sequence, Tuple

from src.measure.intervals import IntervalSet, union_all
from src.measure.numbers import ExactNumber, format_exact
from src.measure.polynomials import Observable, PiecewisePolynomial, as_polynomial

if TYPE_CHECKING:
    from src.stacking.partition import PUBPartition
    from src.stacking.towers import TUBTower, WTUBTower


@dataclass
class ConditionReport:
    kind: str
    conditions: Dict[str, bool] = field(default_factory=dict)
    values: Dict[str, Any] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(self.conditions.values())

    def failed(self) -> Dict[str, Any]:
        return {name: self.values.get(name) for name, passed in self.conditions.items() if not passed}

    def to_json(self) -> Dict[str, Any]:
        return {
            "kind": self.kind,
            "ok": self.ok,
            "conditions": dict(self.conditions),
            "values": {k: format_exact(v) if not isinstance(v, (int, str, list)) else v for k, v in self.values.items()},
        }


def column_sum_bounds(f: PiecewisePolynomial, columns: Sequence[Sequence[IntervalSet]]) -> Tuple[ExactNumber, List[ExactNumber]]:
    """(sup over all prefixes of |sum of f along the column|, sup of |full sum| per column)"""
    partial: ExactNumber = Fraction(0)
    full: List[ExactNumber] = []
    for column in columns:
        acc = PiecewisePolynomial.zero()
        sup: ExactNumber = Fraction(0)
        for strip in column:
            acc = acc + f.profile(strip)
            sup = acc.sup_norm(IntervalSet.span(0, strip.measure))
            partial = max(partial, sup)
        full.append(sup)
    return partial, full


def _tiles(parts: Sequence[IntervalSet], whole: IntervalSet) -> bool:
    union = union_all(parts)
    total = sum((p.measure for p in parts), Fraction(0))
    return union.measure == total and union.issubset(whole)


def check_pub(f: Observable, partition: "PUBPartition") -> ConditionReport:
    g = as_polynomial(f)
    A, E = partition.region, partition.exceptional
    rest = A - E
    report = ConditionReport("PUB")
    report.values["exceptional"] = E.measure
    report.conditions["exceptional"] = E.measure < partition.eps * A.measure
    lhs = g.integral_over(rest) * A.measure
    rhs = rest.measure * g.integral_over(A)
    report.values["balance"] = lhs - rhs
    report.conditions["balance"] = lhs == rhs
    oscillations = [g.oscillation(cell) for cell in partition.cells]
    report.values["oscillation"] = max(oscillations, default=Fraction(0))
    report.conditions["oscillation"] = all(o < partition.eps for o in oscillations)
    width = Fraction(1, partition.n)
    report.conditions["equal_measure"] = all(cell.measure == width for cell in partition.cells)
    report.values["cells"] = len(partition.cells)
    report.conditions["tiling"] = _tiles(list(partition.cells) + [E], A) and union_all(partition.cells) | E == A
    return report


def _tower_common(
    g: PiecewisePolynomial, columns: Sequence[Sequence[IntervalSet]], region: IntervalSet, eps: Fraction, report: ConditionReport
) -> Tuple[ExactNumber, List[ExactNumber]]:
    strips = [strip for column in columns for strip in column]
    width = strips[0].measure if strips else Fraction(0)
    report.conditions["equal_strips"] = all(s.measure == width for s in strips)
    report.conditions["disjoint"] = _tiles(strips, region)
    support = union_all(strips)
    report.values["coverage"] = support.measure
    report.conditions["coverage"] = support.measure > (1 - eps) * region.measure
    total = sum((g.integral_over(s) for s in strips), Fraction(0))
    report.values["integral_identity"] = total - g.integral_over(region)
    report.conditions["integral_identity"] = total == g.integral_over(region)
    return column_sum_bounds(g, columns)


def check_tub(f: Observable, tub: "TUBTower") -> ConditionReport:
    g = as_polynomial(f)
    columns = tub.tower.columns
    report = ConditionReport("TUB")
    partial, full = _tower_common(g, columns, tub.region, tub.eps, report)
    heights = {len(c) for c in columns}
    report.values["height"] = max(heights, default=0)
    if tub.width_bound:
        report.values["n"] = tub.partition.n
        report.conditions["height"] = len(heights) == 1
        report.conditions["width"] = tub.partition.n > tub.N
    else:
        report.conditions["height"] = len(heights) == 1 and max(heights) > tub.N
    norm = g.sup_norm(tub.region)
    report.values["partial_sums"] = partial
    report.conditions["partial_sums"] = partial < norm + tub.eps
    report.values["full_sums"] = max(full, default=Fraction(0))
    report.conditions["full_sums"] = all(s < tub.eps for s in full)
    return report


def check_wtub(f: Observable, wtub: "WTUBTower") -> ConditionReport:
    g = as_polynomial(f)
    columns = wtub.tower.columns
    report = ConditionReport("W-TUB")
    partial, full = _tower_common(g, columns, wtub.region, wtub.eps, report)
    counts = Counter(len(c) for c in columns)
    heights = sorted(counts)
    report.values["heights"] = heights
    report.conditions["heights"] = (
        len(heights) == wtub.M
        and heights == list(range(heights[0], heights[0] + wtub.M))
        and len(set(counts.values())) == 1
        and heights[0] > wtub.N
    )
    norm = g.sup_norm(wtub.region)
    report.values["partial_sums"] = partial
    report.conditions["partial_sums"] = partial < wtub.M * norm
    report.values["full_sums"] = max(full, default=Fraction(0))
    report.conditions["full_sums"] = all(s < wtub.eps for s in full)
    return report
