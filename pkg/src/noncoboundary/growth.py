"""Bounded mean-zero functions with cocycle norms that grow at a prescribed rate

Both constructions certify lower bounds on ||S_n f||_1 computed exactly over
the points of the machine column where S_n is defined; the L1 norm over the
whole space of any extension of the map can only be larger.
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Dict, List, Optional, Sequence

import mpmath
from tenacity import Retrying, before_sleep_log, retry_if_exception_type, stop_after_attempt

from src.config.settings import Settings, get_settings
from src.core.errors import ConfigError, CrossTermError, PreconditionError, VerificationError
from src.measure.intervals import IntervalSet
from src.measure.numbers import QuadIrrational, exact_to_json, format_exact, sqrt_exact, to_mpf
from src.measure.step_functions import StepFunction
from src.noncoboundary.columns import ColumnFunction, ColumnGrid
from src.noncoboundary.escape import SET_CHECK_LIMIT, SlowEscapeSet, almost_invariant_grid, slow_escape_set
from src.transforms.rank_one import RankOneMachine
from src.utils.logging import get_logger

logger = get_logger(__name__)

Rate = Callable[[int], Any]

ESCAPE_CAP = Fraction(1, 8)
ROUNDING_BITS = 40


def growth_rate(name: str, exponent: Any = None) -> Rate:
    """Named rate families: sqrt, power (n^exponent), n_over_log, zero"""
    if name == "sqrt":
        return sqrt_exact
    if name == "power":
        p = Fraction(exponent)
        if not 0 <= p < 1:
            raise ConfigError(f"power rate needs an exponent in [0,1), got {p}")
        if p == 0:
            return lambda n: Fraction(1)
        if p == Fraction(1, 2):
            return sqrt_exact
        return lambda n: mpmath.power(n, mpmath.mpf(p.numerator) / p.denominator)
    if name == "n_over_log":
        return lambda n: mpmath.mpf(n) / mpmath.log(n)
    if name == "zero":
        return lambda n: Fraction(0)
    raise ConfigError(f"unknown growth rate {name!r}")


def _is_exact(value: Any) -> bool:
    return isinstance(value, (int, Fraction, QuadIrrational))


def at_least(x: Any, y: Any) -> bool:
    """x >= y, exactly when y is exact and at working precision otherwise"""
    if _is_exact(y):
        return bool(x >= y)
    return bool(to_mpf(x) >= mpmath.mpf(y))


def rational_above(value: Any) -> Fraction:
    """A dyadic rational >= value"""
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    scale = 2**ROUNDING_BITS
    return Fraction(int(mpmath.ceil(to_mpf(value) * scale)) + 1, scale)


def _rate_text(value: Any) -> Any:
    return exact_to_json(value) if _is_exact(value) else mpmath.nstr(value, 15)


@dataclass
class SlowGrowth:
    f: StepFunction
    escape: Optional[SlowEscapeSet]
    n_min: int
    n_max: int
    entries: List[Dict[str, Any]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(e["ok"] for e in self.entries)

    def rows(self) -> List[Dict[str, Any]]:
        return [{"n": e["n"], "norm": e["norm_float"], "witness": e["rho_text"]} for e in self.entries]

    def to_json(self) -> Dict[str, Any]:
        return {
            "n_min": self.n_min,
            "n_max": self.n_max,
            "f": self.f.to_json(),
            "escape": self.escape.to_json() if self.escape else None,
            "entries": self.entries,
            "ok": self.ok,
        }


def _escape_schedule(rho: Rate, n_min: int, n_max: int, cap: Fraction) -> List[Fraction]:
    """eps_n = min(cap, 4 rho_n / n rounded up) on [n_min, n_max], cap below"""
    eps = [cap] * (n_max + 1)
    previous: Optional[Any] = None
    for n in range(n_min, n_max + 1):
        ratio = rho(n) / n
        if previous is not None and not at_least(previous, ratio):
            raise PreconditionError("rho_n / n must be non-increasing", {"n": n})
        previous = ratio
        eps[n] = min(cap, rational_above(4 * ratio))
    return eps


def slow_growth_function(
    machine: RankOneMachine,
    rho: Rate,
    n_min: int,
    n_max: int,
    cap: Fraction = ESCAPE_CAP,
    settings: Optional[Settings] = None,
) -> SlowGrowth:
    """f = 1_F - p(F) for F = X minus E, E a slow escape set; ||S_n f||_1 >= rho_n on [n_min, n_max]"""
    settings = settings or get_settings()
    if not 1 <= n_min <= n_max:
        raise PreconditionError("need 1 <= n_min <= n_max")
    with mpmath.workdps(settings.cocycle_precision):
        values = {n: rho(n) for n in range(n_min, n_max + 1)}
        if all(at_least(0, v) for v in values.values()):
            entries = [
                {"n": n, "norm": exact_to_json(Fraction(0)), "norm_float": 0.0, "rho": _rate_text(v), "rho_text": mpmath.nstr(to_mpf(v), 12), "ok": True}
                for n, v in values.items()
            ]
            logger.info("slow_growth_degenerate", n_min=n_min, n_max=n_max)
            return SlowGrowth(StepFunction.zero(), None, n_min, n_max, entries)

        eps = _escape_schedule(rho, n_min, n_max, cap)
        escape = slow_escape_set(machine, eps, set_check_limit=min(SET_CHECK_LIMIT, n_max))
        pF = escape.F.measure
        pE = 1 - pF
        F_set = escape.E.complement()
        f = StepFunction.from_pieces([(F_set, 1 - pF), (escape.E, -pF)])
        g = ColumnFunction.combine([(1, escape.F)], -pF)

        entries: List[Dict[str, Any]] = []
        for n in range(n_min, n_max + 1):
            norm = g.l1_norm(n)
            inside = escape.F.stay(n - 1).measure
            bound = n * pE * inside
            sup = g.sup_norm(n)
            sup_ok = inside == 0 or sup >= n * pE
            entry = {
                "n": n,
                "norm": exact_to_json(norm),
                "norm_float": float(norm),
                "rho": _rate_text(values[n]),
                "rho_text": mpmath.nstr(to_mpf(values[n]), 12),
                "bound": exact_to_json(bound),
                "sup": exact_to_json(sup),
                "sup_at_least_npE": sup_ok,
                "ok": at_least(norm, values[n]) and norm >= bound and sup_ok,
            }
            entries.append(entry)

    result = SlowGrowth(f, escape, n_min, n_max, entries)
    logger.info("slow_growth_built", n_min=n_min, n_max=n_max, pE=format_exact(pE), ok=result.ok)
    if not result.ok:
        failed = next(e for e in entries if not e["ok"])
        raise VerificationError("cocycle norms fell below the requested rate or the n p(E) bound", {"n": failed["n"]})
    return result


# Series construction


@dataclass
class SeriesStage:
    m: int
    eps: Fraction
    n: int
    main: Fraction
    cross: Fraction
    later: Fraction
    tail_bound: Fraction
    beyond: Fraction
    norm: Fraction

    @property
    def checks(self) -> Dict[str, bool]:
        scale = self.eps * self.n
        return {
            "main_at_least_eps_n_over_8": self.main >= scale / 8,
            "cross_at_most_eps_n_over_32": self.cross <= scale / 32,
            "tail_at_most_eps_n_over_32": self.tail_bound <= scale / 32,
            "later_within_tail": self.later <= self.tail_bound,
            "estimate_at_least_eps_n_over_16": self.main - self.cross - self.tail_bound >= scale / 16,
            "norm_at_least_eps_n_over_16": self.norm - self.beyond >= scale / 16,
        }

    @property
    def ok(self) -> bool:
        return all(self.checks.values())

    def to_json(self) -> Dict[str, Any]:
        return {
            "m": self.m,
            "eps": exact_to_json(self.eps),
            "n": self.n,
            "main": exact_to_json(self.main),
            "cross": exact_to_json(self.cross),
            "later": exact_to_json(self.later),
            "tail_bound": exact_to_json(self.tail_bound),
            "beyond": exact_to_json(self.beyond),
            "norm": exact_to_json(self.norm),
            "target": exact_to_json(self.eps * self.n / 16),
            "n_at_least_eps_minus_2": self.n * self.eps**2 >= 1,
            "checks": self.checks,
            "ok": self.ok,
        }


@dataclass
class SeriesNoncoboundary:
    f: StepFunction
    ratio: Fraction
    stages: List[SeriesStage]
    sets: List[IntervalSet]

    @property
    def ok(self) -> bool:
        return all(s.ok for s in self.stages)

    def rows(self) -> List[Dict[str, Any]]:
        return [{"n": s.n, "norm": float(s.norm), "witness": float(s.eps * s.n / 16)} for s in self.stages]

    def to_json(self) -> Dict[str, Any]:
        return {
            "ratio": exact_to_json(self.ratio),
            "stages": [s.to_json() for s in self.stages],
            "f": self.f.to_json(),
            "ok": self.ok,
        }


def _check_series(eps1: Fraction, ratio: Fraction, stages: int, n1: int, growth: int) -> None:
    if stages < 1 or n1 < 1 or growth < 2:
        raise PreconditionError("series needs stages >= 1, n_1 >= 1 and growth >= 2")
    if not 0 < ratio < 1 or eps1 <= 0:
        raise PreconditionError("series needs eps_1 > 0 and a ratio in (0,1)")
    if eps1 / (1 - ratio) > 1:
        raise PreconditionError("series weights must sum to at most 1", {"sum": eps1 / (1 - ratio)})
    tail = ratio / (2 * (1 - ratio))
    if tail > Fraction(1, 32):
        raise PreconditionError(
            "weights decay too slowly: the tail sum of eps_k/2 exceeds eps_m/32",
            {"tail_over_eps": tail},
        )


def _series_stages(
    machine: RankOneMachine, eps: Sequence[Fraction], ns: Sequence[int], ratio: Fraction
) -> SeriesNoncoboundary:
    grids: List[ColumnGrid] = [almost_invariant_grid(machine, Fraction(1, 2), n, Fraction(1, 2))[0] for n in ns]
    parts = [ColumnFunction.combine([(1, grid)], Fraction(-1, 2)) for grid in grids]
    total = ColumnFunction.combine([(e, grid) for e, grid in zip(eps, grids)], -sum(eps) / 2)
    stages: List[SeriesStage] = []
    for m, (e_m, n_m) in enumerate(zip(eps, ns)):
        norms = [part.l1_norm(n_m) for part in parts]
        cross = sum((eps[k] * norms[k] for k in range(m)), Fraction(0))
        if cross > e_m * n_m / 32:
            raise CrossTermError(
                f"earlier terms not averaged out at n={n_m}",
                {"stage": m + 1, "cross": cross, "allowed": e_m * n_m / 32},
            )
        stage = SeriesStage(
            m=m + 1,
            eps=e_m,
            n=n_m,
            main=e_m * norms[m],
            cross=cross,
            later=sum((eps[k] * norms[k] for k in range(m + 1, len(eps))), Fraction(0)),
            tail_bound=e_m * ratio / (1 - ratio) / 2 * n_m,
            beyond=eps[-1] * ratio / (1 - ratio) / 2 * n_m,
            norm=total.l1_norm(n_m),
        )
        logger.info("series_stage", m=stage.m, n=n_m, checks=stage.checks)
        stages.append(stage)
    sets = [grid.to_interval_set(machine) for grid in grids]
    f = StepFunction.constant(-sum(eps) / 2)
    for e, A in zip(eps, sets):
        f = f + StepFunction.indicator(A, e)
    return SeriesNoncoboundary(f=f, ratio=ratio, stages=stages, sets=sets)


def series_noncoboundary(
    machine: RankOneMachine,
    eps1: Any,
    ratio: Any,
    stages: int,
    n1: int,
    growth: int = 4,
    settings: Optional[Settings] = None,
) -> SeriesNoncoboundary:
    """f = sum_m eps_m (1_{A_m} - 1/2) with ||S_{n_m} f||_1 >= (eps_m/16) n_m at every stage

    eps_m = eps1 * ratio^(m-1) and n_m = n1 * growth^(m-1). When the earlier
    terms are not yet averaged out at some n_m, the growth factor is doubled
    and the construction retried.
    """
    settings = settings or get_settings()
    eps1, ratio = Fraction(eps1), Fraction(ratio)
    _check_series(eps1, ratio, stages, n1, growth)
    eps = [eps1 * ratio**k for k in range(stages)]

    for attempt in Retrying(
        retry=retry_if_exception_type(CrossTermError),
        stop=stop_after_attempt(settings.retry_attempts),
        before_sleep=before_sleep_log(logger, logging.WARNING),
        reraise=True,
    ):
        with attempt:
            factor = growth * 2 ** (attempt.retry_state.attempt_number - 1)
            ns = [n1 * factor**k for k in range(stages)]
            result = _series_stages(machine, eps, ns, ratio)

    logger.info("series_noncoboundary_built", stages=stages, n=[s.n for s in result.stages], ok=result.ok)
    if not result.ok:
        failed = next(s for s in result.stages if not s.ok)
        raise VerificationError(
            "series stage failed its norm estimate",
            {"stage": failed.m, "checks": {k: v for k, v in failed.checks.items() if not v}},
        )
    return result
