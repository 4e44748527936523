"""Greedy stacking order keeping partial integral sums small"""

from fractions import Fraction
from typing import Any, List, Sequence, Tuple

from src.core.errors import PreconditionError
from src.measure.intervals import IntervalSet
from src.measure.numbers import ExactNumber, as_exact, format_exact


def greedy_order(integrals: Sequence[Any], start: Any = 0) -> List[int]:
    """Order with sigma_k <= 0 followed by a nonnegative piece, sigma_k > 0 by a negative one

    ``start`` is the sum already stacked below the first chosen piece. Among
    admissible pieces the largest magnitude wins, ties by lowest index.
    """
    values = [as_exact(v) for v in integrals]
    sigma = as_exact(start)
    total = sum(values, sigma)
    if total != 0:
        raise PreconditionError(
            "greedy stacking needs integrals summing to zero", {"total": format_exact(total)}
        )
    remaining = list(range(len(values)))
    order: List[int] = []
    while remaining:
        if sigma <= 0:
            admissible = [i for i in remaining if values[i] >= 0]
            pick = max(admissible, key=lambda i: (values[i], -i))
        else:
            admissible = [i for i in remaining if values[i] < 0]
            pick = min(admissible, key=lambda i: (values[i], i))
        order.append(pick)
        remaining.remove(pick)
        sigma = sigma + values[pick]
    return order


def partial_sums(integrals: Sequence[Any], order: Sequence[int], start: Any = 0) -> List[ExactNumber]:
    sigma = as_exact(start)
    out: List[ExactNumber] = []
    for i in order:
        sigma = sigma + as_exact(integrals[i])
        out.append(sigma)
    return out


def greedy_stack(pieces: Sequence[Tuple[IntervalSet, Any]]) -> List[int]:
    """Stacking order for equal-measure pieces given with their exact integrals"""
    if pieces:
        width = pieces[0][0].measure
        if any(p.measure != width for p, _ in pieces):
            raise PreconditionError("greedy stacking needs pieces of equal measure")
    return greedy_order([value for _, value in pieces])


def max_abs(values: Sequence[Any]) -> ExactNumber:
    best: ExactNumber = Fraction(0)
    for v in values:
        if abs(v) > best:
            best = abs(v)
    return best
