"""Simultaneous Diophantine approximation by exhaustive search"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
from tenacity import (
    Retrying,
    before_sleep_log,
    retry_if_exception_type,
    stop_after_attempt,
)

from src.config.settings import Settings, get_settings
from src.core.errors import ApproximationNotFoundError, ConfigError, VerificationError
from src.measure.numbers import ExactNumber, as_exact, exact_floor, exact_to_json, format_exact, to_mpf
from src.utils.logging import get_logger

logger = get_logger(__name__)

# numpy screening works on blocks of candidate denominators
BLOCK = 4096
FLOAT_SLACK = 1e-9


@dataclass
class Approximation:
    """q with |q x_i - p_i| < q^(-1/d) for every i"""

    q: int
    p: List[int]
    errors: List[ExactNumber]
    exponent: int

    def holds(self, x: Sequence[Any]) -> bool:
        """Re-check the strict inequality exactly: |q x_i - p_i|^d * q < 1"""
        for xi, pi in zip(x, self.p):
            err = abs(self.q * as_exact(xi) - pi)
            if not err**self.exponent * self.q < 1:
                return False
        return True

    def to_json(self) -> Dict[str, Any]:
        return {
            "q": self.q,
            "p": self.p,
            "errors": [exact_to_json(e) for e in self.errors],
            "exponent": self.exponent,
        }


def _nearest(value: ExactNumber) -> int:
    return exact_floor(value + Fraction(1, 2))


def _exact_candidate(x: Sequence[ExactNumber], q: int, d: int) -> Optional[Approximation]:
    p: List[int] = []
    errors: List[ExactNumber] = []
    for xi in x:
        target = q * xi
        pi = _nearest(target)
        err = abs(target - pi)
        if not err**d * q < 1:
            return None
        p.append(pi)
        errors.append(err)
    return Approximation(q=q, p=p, errors=errors, exponent=d)


def simultaneous_approximation(
    x: Sequence[Any], exponent: int, q_max: int, q_min: Optional[int] = None
) -> Approximation:
    """Least q in [q_min, q_max] approximating every x_i to within q^(-1/exponent)

    The default floor q_min = 2^exponent + 1 skips denominators for which the
    bound is at least 1/2 and therefore met by every input.
    """
    values = [as_exact(v) for v in x]
    if not values:
        raise ConfigError("simultaneous approximation needs at least one number")
    if any(not 0 < v < 1 for v in values):
        raise ConfigError("approximated numbers must lie in (0,1)")
    if exponent < 1:
        raise ConfigError(f"exponent must be at least 1, got {exponent}")
    start = (1 << exponent) + 1 if q_min is None else max(1, q_min)

    floats = np.array([float(to_mpf(v)) for v in values], dtype=float)
    q = start
    while q <= q_max:
        block = np.arange(q, min(q + BLOCK, q_max + 1), dtype=float)
        products = np.outer(block, floats)
        errs = np.abs(products - np.rint(products))
        limits = block ** (-1.0 / exponent)
        ok = np.all(errs < limits[:, None] + FLOAT_SLACK, axis=1)
        for idx in np.flatnonzero(ok):
            found = _exact_candidate(values, int(block[idx]), exponent)
            if found is not None:
                logger.info("approximation_found", q=found.q, exponent=exponent, size=len(values))
                return found
        q += BLOCK

    raise ApproximationNotFoundError(
        f"no q <= {q_max} approximates ({', '.join(format_exact(v) for v in values)}) "
        f"to exponent {exponent}",
        q_max=q_max,
        suggested_q_max=q_max * 2,
    )


def find_approximation(
    x: Sequence[Any],
    exponent: int,
    q_max: Optional[int] = None,
    q_min: Optional[int] = None,
    settings: Optional[Settings] = None,
) -> Approximation:
    """simultaneous_approximation with the search bound doubled on each retry"""
    settings = settings or get_settings()
    bound = q_max or settings.approximation_q_max
    for attempt in Retrying(
        retry=retry_if_exception_type(ApproximationNotFoundError),
        stop=stop_after_attempt(settings.retry_attempts),
        before_sleep=before_sleep_log(logger, logging.WARNING),
        reraise=True,
    ):
        with attempt:
            scaled = bound * 2 ** (attempt.retry_state.attempt_number - 1)
            result = simultaneous_approximation(x, exponent, scaled, q_min)
    if not result.holds(x):
        raise VerificationError(f"approximation q={result.q} failed its exact re-check")
    return result
