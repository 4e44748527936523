"""Eigenvalues forced by integer-valued coboundaries

If f takes integer values and f - ∫f = h - h∘tau, then H = exp(2 pi i h)
satisfies H∘tau = exp(2 pi i ∫f) H, so exp(2 pi i ∫f) is an eigenvalue.
"""

from dataclasses import dataclass
from typing import Any, Callable, Dict, Iterable, Optional, Union

import mpmath

from src.config.settings import Settings, get_settings
from src.core.errors import PreconditionError
from src.measure.numbers import ExactNumber, as_exact, exact_to_json, format_exact, is_rational, to_mpf
from src.measure.step_functions import StepFunction
from src.transforms.base import Transform
from src.utils.helpers import sample_points
from src.utils.logging import get_logger

logger = get_logger(__name__)


@dataclass
class EigenvalueCheck:
    constant: ExactNumber
    eigenvalue: mpmath.mpc
    max_residual: float
    witness: Optional[ExactNumber]
    samples: int
    passed: bool

    @property
    def rational(self) -> bool:
        """A rational constant gives a root of unity, so tau is not totally ergodic"""
        return is_rational(self.constant)

    @property
    def trivial(self) -> bool:
        return is_rational(self.constant) and self.constant.denominator == 1  # type: ignore[union-attr]

    def to_json(self) -> Dict[str, Any]:
        return {
            "constant": exact_to_json(self.constant),
            "eigenvalue": {
                "re": mpmath.nstr(mpmath.re(self.eigenvalue), 20),
                "im": mpmath.nstr(mpmath.im(self.eigenvalue), 20),
            },
            "max_residual": self.max_residual,
            "witness": exact_to_json(self.witness) if self.witness is not None else None,
            "samples": self.samples,
            "passed": self.passed,
            "rational": self.rational,
            "trivial": self.trivial,
        }


def eigenvalue_witness(
    f: StepFunction,
    t: Transform,
    h: Union[StepFunction, Callable[[Any], Any]],
    samples: Optional[int] = None,
    seed: Optional[int] = None,
    settings: Optional[Settings] = None,
) -> EigenvalueCheck:
    """Check H∘tau = exp(2 pi i c) H pointwise, with c = ∫f"""
    settings = settings or get_settings()
    for value in f.values():
        if not (is_rational(value) and value.denominator == 1):  # type: ignore[union-attr]
            raise PreconditionError(
                "eigenvalue witness needs integer step values",
                details={"value": format_exact(value)},
            )
    constant = f.integral()
    count = samples or settings.sample_count
    seed = settings.seed if seed is None else seed
    points = [x for x in sample_points(t.domain, count, seed) if t.defined_at(x)]

    def transfer(x: Any) -> mpmath.mpf:
        return to_mpf(h.evaluate(x) if isinstance(h, StepFunction) else h(x))

    with mpmath.workdps(settings.cocycle_precision):
        eigenvalue = mpmath.expjpi(2 * to_mpf(constant))
        worst = mpmath.mpf(0)
        witness: Optional[ExactNumber] = None
        for x in points:
            before = mpmath.expjpi(2 * transfer(x))
            after = mpmath.expjpi(2 * transfer(t.apply(x)))
            gap = abs(after - eigenvalue * before)
            if gap > worst:
                worst, witness = gap, x
        passed = worst <= settings.pointwise_tolerance
        if passed and abs(abs(eigenvalue) - 1) > settings.pointwise_tolerance:
            passed = False
    check = EigenvalueCheck(
        constant=constant,
        eigenvalue=eigenvalue,
        max_residual=float(worst),
        witness=witness,
        samples=len(points),
        passed=passed,
    )
    logger.info(
        "eigenvalue_checked",
        transform=t.name,
        constant=format_exact(constant),
        passed=passed,
        max_residual=check.max_residual,
    )
    return check


def rational_eigenvalue_test(column_heights: Iterable[int], frequency: Any) -> bool:
    """Whether exp(2 pi i frequency) can be an eigenvalue of a rank-one tower

    A root of unity exp(2 pi i a/b) survives on a tower of height h only if
    b divides h; returns False once some recorded height rules it out.
    """
    freq = as_exact(frequency)
    if not is_rational(freq):
        raise PreconditionError("rational test frequencies only")
    b = freq.denominator
    return all(height % b == 0 for height in column_heights)
