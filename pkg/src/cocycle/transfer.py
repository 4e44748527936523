"""Transfer functions: Cesàro averages, algebraic rewrites and coboundary checks"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Dict, Optional, Union

import mpmath

from src.cocycle.birkhoff import CocycleReport, cocycle_norm_sweep, iterate_sums, sampled_sup
from src.config.settings import Settings, get_settings
from src.core.errors import ConfigError, PreconditionError
from src.measure.intervals import IntervalSet
from src.measure.numbers import ExactNumber, as_exact, exact_to_json, format_exact, to_mpf
from src.measure.step_functions import StepFunction
from src.transforms.base import Transform
from src.transforms.interval_map import PiecewiseTranslation
from src.utils.helpers import sample_points
from src.utils.logging import get_logger

logger = get_logger(__name__)

Observable = Union[StepFunction, Callable[[Any], Any]]

REWRITE_MODES = ("power", "commuting", "conjugate")


@dataclass
class CesaroTransfer:
    """h with f - S_n f / n = h - h∘tau on the region where tau^{n-1} is defined"""

    n: int
    h: StepFunction
    average: StepFunction
    region: IntervalSet

    def sides(self, t: Transform, f: StepFunction) -> tuple[StepFunction, StepFunction]:
        lhs = (f - self.average).restrict(self.region)
        rhs = (self.h - self.h.compose(t.interval_map)).restrict(self.region)
        return lhs, rhs

    def to_json(self) -> Dict[str, Any]:
        return {
            "n": self.n,
            "h": self.h.to_json(),
            "average": self.average.to_json(),
            "region": self.region.to_json(),
        }


def cesaro_transfer(t: Transform, f: StepFunction, n: int) -> CesaroTransfer:
    """h = (1/n) sum_{k=0}^{n-1} S_k f"""
    if n < 1:
        raise ConfigError(f"n must be at least 1, got {n}")
    total = StepFunction.zero()
    last = StepFunction.zero()
    region = IntervalSet.unit()
    for k, s_k, r_k in iterate_sums(f, t.interval_map, n):
        if k < n:
            total = total + s_k
        else:
            last, region = s_k, r_k
    scale = Fraction(1, n)
    result = CesaroTransfer(
        n=n,
        h=total.scale(scale),
        average=last.scale(scale),
        region=region,
    )
    logger.info("cesaro_transfer_built", transform=t.name, n=n, pieces=len(result.h))
    return result


@dataclass
class RewriteResult:
    """f together with one exact transfer per map"""

    mode: str
    f: StepFunction
    transfers: Dict[str, StepFunction]
    region: IntervalSet
    residuals: Dict[str, StepFunction] = field(default_factory=dict)

    @property
    def exact(self) -> bool:
        return all(not r for r in self.residuals.values())

    def to_json(self) -> Dict[str, Any]:
        return {
            "mode": self.mode,
            "f": self.f.to_json(),
            "transfers": {k: v.to_json() for k, v in self.transfers.items()},
            "region": self.region.to_json(),
            "exact": self.exact,
        }


def _check_relation(
    tau: Transform, sigma: Transform, tau_power: int, samples: int, seed: int
) -> None:
    """tau∘sigma = sigma∘tau^k at sample points"""
    tmap, smap = tau.interval_map, sigma.interval_map
    left = tmap.compose(smap)
    right = smap.compose(tmap.power(tau_power))
    for x in sample_points(IntervalSet.unit(), samples, seed):
        if not (left.defined_at(x) and right.defined_at(x)):
            continue
        if left.apply(x) != right.apply(x):
            relation = "commute" if tau_power == 1 else f"satisfy tau sigma = sigma tau^{tau_power}"
            raise PreconditionError(
                f"maps do not {relation}",
                details={"witness": format_exact(x)},
            )


def _coboundary(h: StepFunction, tmap: PiecewiseTranslation) -> StepFunction:
    return h - h.compose(tmap)


def algebraic_rewrite(
    mode: str,
    h: StepFunction,
    t: Transform,
    aux: Union[int, Transform],
    samples: Optional[int] = None,
    settings: Optional[Settings] = None,
) -> RewriteResult:
    if mode not in REWRITE_MODES:
        raise ConfigError(f"unknown rewrite mode {mode!r}; expected one of {REWRITE_MODES}")
    settings = settings or get_settings()
    tmap = t.interval_map
    count = samples or settings.sample_count

    if mode == "power":
        if not isinstance(aux, int) or aux < 1:
            raise ConfigError("power rewrite needs a positive integer exponent")
        n = aux
        tn = tmap.power(n)
        region = tn.domain
        big_h = StepFunction.zero()
        for k in range(n):
            big_h = big_h + h.compose(tmap.power(k))
        f = _coboundary(h, tn).restrict(region)
        result = RewriteResult(
            mode, f, {"tau": big_h}, region,
            {"tau": f - _coboundary(big_h, tmap).restrict(region)},
        )
    else:
        if not isinstance(aux, Transform):
            raise ConfigError(f"{mode} rewrite needs a second transformation")
        smap = aux.interval_map
        _check_relation(t, aux, 1 if mode == "commuting" else 2, count, settings.seed)
        g = _coboundary(h, tmap)
        f = g - g.compose(smap)
        if mode == "commuting":
            k = _coboundary(h, smap)
        else:
            h_sigma = h.compose(smap)
            k = h - h_sigma - h_sigma.compose(tmap)
        region = tmap.domain & smap.domain & smap.pullback(tmap.domain) & tmap.pullback(smap.domain)
        if mode == "conjugate":
            region = region & tmap.pullback(tmap.pullback(smap.domain))
        f = f.restrict(region)
        result = RewriteResult(
            mode, f, {"tau": k, "sigma": g}, region,
            {
                "tau": f - _coboundary(k, tmap).restrict(region),
                "sigma": f - _coboundary(g, smap).restrict(region),
            },
        )
    logger.info("rewrite_built", mode=mode, transform=t.name, exact=result.exact)
    return result


@dataclass
class CoboundaryCheck:
    """Residual of f = h - h∘tau plus a sweep against 2‖h‖_∞"""

    max_residual: float
    witness: Optional[ExactNumber]
    samples: int
    exact_difference: Optional[StepFunction] = None
    sweep: Optional[CocycleReport] = None
    sweep_max: Optional[float] = None
    bound: Optional[float] = None

    @property
    def exact(self) -> bool:
        return self.exact_difference is not None and not self.exact_difference

    @property
    def within_bound(self) -> Optional[bool]:
        if self.sweep_max is None or self.bound is None:
            return None
        return self.sweep_max <= self.bound

    def to_json(self) -> Dict[str, Any]:
        return {
            "max_residual": mpmath.nstr(self.max_residual, 15),
            "witness": exact_to_json(self.witness) if self.witness is not None else None,
            "samples": self.samples,
            "exact_difference": (
                self.exact_difference.to_json() if self.exact_difference is not None else None
            ),
            "exact": self.exact,
            "sweep_max": self.sweep_max,
            "bound": self.bound,
            "within_bound": self.within_bound,
        }


def _value(g: Observable, x: Any) -> Any:
    return g.evaluate(x) if isinstance(g, StepFunction) else g(x)


def verify_coboundary(
    t: Transform,
    f: Observable,
    h: Observable,
    samples: Optional[int] = None,
    n_max: int = 0,
    seed: Optional[int] = None,
    settings: Optional[Settings] = None,
) -> CoboundaryCheck:
    settings = settings or get_settings()
    count = samples or settings.sample_count
    seed = settings.seed if seed is None else seed
    points = [x for x in sample_points(t.domain, count, seed) if t.defined_at(x)]

    worst = mpmath.mpf(0)
    witness: Optional[ExactNumber] = None
    h_sup = mpmath.mpf(0)
    with mpmath.workdps(settings.cocycle_precision):
        for x in points:
            hx = _value(h, x)
            diff = to_mpf(_value(f, x)) - to_mpf(hx) + to_mpf(_value(h, t.apply(x)))
            h_sup = max(h_sup, abs(to_mpf(hx)))
            if abs(diff) > worst:
                worst, witness = abs(diff), x

    check = CoboundaryCheck(max_residual=float(worst), witness=witness, samples=len(points))
    if isinstance(f, StepFunction) and isinstance(h, StepFunction):
        domain = t.domain
        check.exact_difference = (f - _coboundary(h, t.interval_map)).restrict(domain)
        h_bound: Any = 2 * h.sup_norm()
    else:
        h_bound = 2 * h_sup
    check.bound = float(to_mpf(h_bound))

    if n_max > 0:
        if isinstance(f, StepFunction):
            exact_bound = as_exact(h_bound) if isinstance(h, StepFunction) else None
            check.sweep = cocycle_norm_sweep(
                t, f, "inf", n_max, transfer_bound=exact_bound, settings=settings
            )
            check.sweep_max = float(to_mpf(check.sweep.max_norm()))
        else:
            check.sweep_max = max(
                sampled_sup(t, f, n, points[: min(len(points), 200)]) for n in range(1, n_max + 1)
            )
    logger.info(
        "coboundary_verified",
        transform=t.name,
        max_residual=check.max_residual,
        exact=check.exact,
        sweep_max=check.sweep_max,
        bound=check.bound,
    )
    return check

