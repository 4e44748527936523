"""Exact continued fraction expansions"""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

from src.core.errors import PreconditionError
from src.measure.numbers import ExactNumber, as_exact, exact_floor, exact_to_json, frac_part
from src.utils.logging import get_logger

logger = get_logger(__name__)


def distance_to_integer(x: Any) -> ExactNumber:
    """‖x‖, the exact distance from x to the nearest integer"""
    r = frac_part(as_exact(x))
    return min(r, 1 - r)


@dataclass
class ContinuedFraction:
    """Partial quotients and convergents of an exact number in (0, 1)"""

    alpha: ExactNumber
    quotients: List[int]
    convergents: List[Tuple[int, int]]
    truncated: bool = False
    period_start: Optional[int] = None
    period_length: Optional[int] = None
    notes: List[str] = field(default_factory=list)

    @property
    def denominators(self) -> List[int]:
        return [q for _, q in self.convergents]

    @property
    def is_periodic(self) -> bool:
        return self.period_length is not None

    def error(self, k: int) -> ExactNumber:
        """|q_k alpha - p_k|"""
        p, q = self.convergents[k]
        return abs(q * self.alpha - p)

    def determinant(self, k: int) -> int:
        """p_k q_{k-1} - p_{k-1} q_k, which is ±1"""
        (p, q), (p0, q0) = self.convergents[k], self.convergents[k - 1]
        return p * q0 - p0 * q

    def to_json(self) -> Dict[str, Any]:
        return {
            "alpha": exact_to_json(self.alpha),
            "quotients": self.quotients,
            "convergents": [[p, q] for p, q in self.convergents],
            "truncated": self.truncated,
            "period_start": self.period_start,
            "period_length": self.period_length,
        }


def continued_fraction_expand(alpha: Any, depth: int) -> ContinuedFraction:
    """First ``depth`` partial quotients [a_0; a_1, ...] of alpha in (0,1)

    Quadratic irrationals have eventually periodic expansions; the period is
    found by the first repeated complete quotient. Rationals stop early and
    are flagged as truncated.
    """
    x = as_exact(alpha)
    if not 0 < x < 1:
        raise PreconditionError(f"continued fraction input must lie in (0,1), got {x}")
    if depth < 1:
        raise PreconditionError("depth must be at least 1")

    quotients: List[int] = []
    convergents: List[Tuple[int, int]] = []
    seen: Dict[ExactNumber, int] = {}
    p_prev, p = 0, 1
    q_prev, q = 1, 0
    period_start: Optional[int] = None
    period_length: Optional[int] = None
    truncated = False

    current: ExactNumber = x
    while len(quotients) < depth:
        if period_length is None and len(quotients) > 0:
            if current in seen:
                period_start = seen[current]
                period_length = len(quotients) - period_start
            else:
                seen[current] = len(quotients)
        a = exact_floor(current)
        quotients.append(a)
        p_prev, p = p, a * p + p_prev
        q_prev, q = q, a * q + q_prev
        convergents.append((p, q))
        rest = current - a
        if rest == 0:
            truncated = len(quotients) < depth
            break
        current = 1 / rest

    cf = ContinuedFraction(x, quotients, convergents, truncated, period_start, period_length)
    if truncated:
        cf.notes.append("rational input: expansion ended before the requested depth")
    logger.debug(
        "continued_fraction_expanded",
        depth=len(quotients),
        period=period_length,
        truncated=truncated,
    )
    return cf


def convergent_for_gap(alpha: Any, scale: Any, max_depth: int = 60) -> Tuple[int, ExactNumber]:
    """Smallest convergent denominator q_k (k >= 1) with scale * ‖q_k alpha‖ <= 1

    Returns (q_k, ‖q_k alpha‖).
    """
    cf = continued_fraction_expand(alpha, max_depth)
    for k, (_, q) in enumerate(cf.convergents):
        if k == 0:
            continue
        gap = distance_to_integer(q * cf.alpha)
        if gap * as_exact(scale) <= 1:
            return q, gap
    raise PreconditionError(f"no convergent within depth {max_depth} meets the gap request")

