"""Birkhoff sums, norm sweeps and tightness reports"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Dict, Iterator, List, Optional, Sequence, Tuple, Union

import mpmath
import numpy as np

from src.config.settings import Settings, get_settings
from src.core.errors import ConfigError, PreconditionError
from src.measure.intervals import IntervalSet
from src.measure.numbers import ExactNumber, as_exact, exact_to_json, format_exact, to_mpf
from src.measure.step_functions import INF, Norm, StepFunction, is_exact_norm
from src.transforms.base import Transform
from src.transforms.interval_map import PiecewiseTranslation
from src.transforms.simplex import SimplexTranslation
from src.utils.helpers import sample_points
from src.utils.logging import get_logger

logger = get_logger(__name__)

Observable = Union[StepFunction, Sequence[Any]]


def _norm_text(value: Norm) -> str:
    if is_exact_norm(value):
        with mpmath.workdps(30):
            return mpmath.nstr(to_mpf(value), 20)
    return mpmath.nstr(value, 20)


def _norm_float(value: Norm) -> float:
    return float(to_mpf(value)) if is_exact_norm(value) else float(value)


def _norm_json(value: Norm) -> Dict[str, Any]:
    if is_exact_norm(value):
        return {"exact": exact_to_json(value), "approx": _norm_text(value)}
    return {"exact": None, "approx": _norm_text(value)}


@dataclass
class SweepEntry:
    n: int
    norm: Norm
    witness: Optional[ExactNumber]

    def to_row(self) -> Dict[str, Any]:
        return {
            "n": self.n,
            "norm": _norm_text(self.norm),
            "witness": format_exact(self.witness) if self.witness is not None else "",
        }


@dataclass
class Verdict:
    """bounded(B), growing(slope) or inconclusive"""

    kind: str
    bound: Optional[ExactNumber] = None
    slope: Optional[float] = None
    r2: Optional[float] = None

    def __str__(self) -> str:
        if self.kind == "bounded":
            return f"bounded({format_exact(self.bound)})"
        if self.kind == "growing":
            return f"growing({self.slope:.4f})"
        return "inconclusive"

    def to_json(self) -> Dict[str, Any]:
        return {
            "kind": self.kind,
            "bound": exact_to_json(self.bound) if self.bound is not None else None,
            "slope": None if self.slope is None else round(self.slope, 12),
            "r2": None if self.r2 is None else round(self.r2, 12),
        }


@dataclass
class CocycleReport:
    """Per-n norms of S_n f with a boundedness verdict"""

    r: str
    entries: List[SweepEntry] = field(default_factory=list)
    verdict: Verdict = field(default_factory=lambda: Verdict("inconclusive"))
    sampled: bool = False
    sample_count: int = 0
    notes: List[str] = field(default_factory=list)

    @property
    def norms(self) -> List[Norm]:
        return [e.norm for e in self.entries]

    def max_norm(self) -> Norm:
        return max(self.norms, key=_norm_float) if self.entries else Fraction(0)

    def rows(self) -> List[Dict[str, Any]]:
        return [e.to_row() for e in self.entries]

    def to_json(self) -> Dict[str, Any]:
        return {
            "r": self.r,
            "entries": [
                {
                    "n": e.n,
                    "norm": _norm_json(e.norm),
                    "witness": exact_to_json(e.witness) if e.witness is not None else None,
                }
                for e in self.entries
            ],
            "verdict": self.verdict.to_json(),
            "sampled": self.sampled,
            "sample_count": self.sample_count,
            "notes": self.notes,
        }


@dataclass
class TightnessReport:
    """A_n = least A with p{|S_n f| <= A} >= 1 - eps, relative to the defined region"""

    eps: ExactNumber
    entries: List[Tuple[int, ExactNumber]] = field(default_factory=list)
    backward: List[Tuple[int, ExactNumber]] = field(default_factory=list)
    tight_candidate: bool = False

    def to_json(self) -> Dict[str, Any]:
        return {
            "eps": exact_to_json(self.eps),
            "entries": [{"n": n, "A": exact_to_json(a)} for n, a in self.entries],
            "backward": [{"n": n, "A": exact_to_json(a)} for n, a in self.backward],
            "tight_candidate": self.tight_candidate,
        }


# Orbit sums


def birkhoff_sum(t: Transform, f: Observable, n: int, x: Any) -> ExactNumber:
    """S_n f(x) = sum_{k<n} f(tau^k x), exact; simplex states take a value vector"""
    if n < 0:
        raise PreconditionError("n must be nonnegative")
    total: ExactNumber = Fraction(0)
    point = x if isinstance(x, tuple) else as_exact(x)
    for k in range(n):
        if isinstance(point, tuple):
            assert isinstance(t, SimplexTranslation)
            total = total + t.observe(f, point)  # type: ignore[arg-type]
        else:
            total = total + f.evaluate(point)  # type: ignore[union-attr]
        if k + 1 < n:
            point = t.apply(point)
    return total


def iterate_sums(
    f: StepFunction, tmap: PiecewiseTranslation, n_max: int, start: int = 1
) -> Iterator[Tuple[int, StepFunction, IntervalSet]]:
    """Yield (n, S_n f, R_n) for n = 1..n_max using S_{n+1} = f + S_n∘tau

    R_n is where the first n - 1 iterates are defined; S_n is exact there and
    zero elsewhere.
    """
    region = IntervalSet.unit()
    current = f
    for n in range(1, n_max + 1):
        if n >= start:
            yield n, current, region
        region = tmap.pullback(region)
        current = (f + current.compose(tmap)).restrict(region)


def backward_sums(
    f: StepFunction, tmap: PiecewiseTranslation, n_max: int
) -> Iterator[Tuple[int, StepFunction, IntervalSet]]:
    """Yield (n, T_n, R) with T_n = sum_{k=1..n} f∘tau^{-k} = -S_{-n} f"""
    inverse = tmap.inverse()
    region = inverse.domain
    current = f.compose(inverse)
    for n in range(1, n_max + 1):
        yield n, current, region
        region = inverse.pullback(region)
        current = (f + current).compose(inverse).restrict(region)


# Verdicts


def growth_fit(ns: Sequence[int], norms: Sequence[float]) -> Tuple[Optional[float], Optional[float]]:
    """Least-squares slope and R^2 of log norm against log n"""
    pairs = [(n, v) for n, v in zip(ns, norms) if n > 0 and v > 0]
    if len(pairs) < 3:
        return None, None
    x = np.log(np.array([p[0] for p in pairs], dtype=float))
    y = np.log(np.array([p[1] for p in pairs], dtype=float))
    slope, intercept = np.polyfit(x, y, 1)
    predicted = slope * x + intercept
    ss_res = float(np.sum((y - predicted) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 0.0
    return float(slope), r2


def decide_verdict(
    entries: Sequence[SweepEntry], bound: Optional[ExactNumber], settings: Settings
) -> Verdict:
    if bound is not None and all(
        (e.norm <= bound) if is_exact_norm(e.norm) else (e.norm <= to_mpf(bound)) for e in entries
    ):
        return Verdict("bounded", bound=bound)
    slope, r2 = growth_fit([e.n for e in entries], [_norm_float(e.norm) for e in entries])
    if (
        slope is not None
        and r2 is not None
        and slope >= settings.growth_slope_threshold
        and r2 >= settings.growth_r2_threshold
    ):
        return Verdict("growing", slope=slope, r2=r2)
    return Verdict("inconclusive", slope=slope, r2=r2)


def _parse_r(r: Any) -> Any:
    if isinstance(r, str) and r.lower() in ("inf", "infinity", "∞"):
        return INF
    if r == float("inf"):
        return INF
    value = Fraction(r)
    if value < 1:
        raise ConfigError(f"norm index must be >= 1 or inf, got {r}")
    return value


# Sweeps


def cocycle_norm_sweep(
    t: Transform,
    f: Observable,
    r: Any,
    n_max: int,
    transfer_bound: Optional[ExactNumber] = None,
    settings: Optional[Settings] = None,
    samples: Optional[int] = None,
    seed: Optional[int] = None,
) -> CocycleReport:
    """‖S_n f‖_r for n = 1..n_max with a verdict

    ``transfer_bound`` is 2‖h‖_∞ for a known transfer h; it enables the
    bounded verdict.
    """
    settings = settings or get_settings()
    r_value = _parse_r(r)
    report = CocycleReport(r="inf" if r_value == INF else str(r_value))
    if isinstance(t, SimplexTranslation) and t.m > 2:
        _sweep_states(t, f, r_value, n_max, report, samples or settings.sample_count)
    elif isinstance(f, StepFunction):
        _sweep_exact(t, f, r_value, n_max, report, settings, samples, seed)
    else:
        raise PreconditionError("interval transforms need a step-function observable")
    report.verdict = decide_verdict(report.entries, transfer_bound, settings)
    logger.info(
        "sweep_completed",
        transform=t.name,
        n_max=n_max,
        r=report.r,
        sampled=report.sampled,
        verdict=str(report.verdict),
    )
    return report


def _sweep_exact(
    t: Transform,
    f: StepFunction,
    r: Any,
    n_max: int,
    report: CocycleReport,
    settings: Settings,
    samples: Optional[int],
    seed: Optional[int],
) -> None:
    tmap = t.interval_map
    for n, s_n, region in iterate_sums(f, tmap, n_max):
        report.entries.append(SweepEntry(n, s_n.lr_norm(r, region), s_n.argmax_abs()))
        if len(s_n) > settings.max_exact_pieces and n < n_max:
            report.notes.append(
                f"piece count {len(s_n)} exceeded {settings.max_exact_pieces} at n={n}; "
                "continuing on a sample grid"
            )
            _continue_sampled(
                t, f, s_n, region, n, r, n_max, report,
                samples or settings.sample_count,
                settings.seed if seed is None else seed,
            )
            return


def _continue_sampled(
    t: Transform,
    f: StepFunction,
    s_n: StepFunction,
    region: IntervalSet,
    n0: int,
    r: Any,
    n_max: int,
    report: CocycleReport,
    count: int,
    seed: int,
) -> None:
    """Carry S_n f forward pointwise: S_{n+1}(x) = S_n(x) + f(tau^n x)"""
    report.sampled = True
    report.sample_count = count
    points = sample_points(region, count, seed)
    sums = [s_n.evaluate(x) for x in points]
    tmap = t.interval_map
    orbit = list(points)
    for _ in range(n0):
        orbit = [tmap.apply(y) if y is not None and tmap.defined_at(y) else None for y in orbit]
    for n in range(n0 + 1, n_max + 1):
        alive = []
        for i, y in enumerate(orbit):
            if y is None:
                continue
            sums[i] = sums[i] + f.evaluate(y)
            alive.append(i)
        orbit = [tmap.apply(y) if y is not None and tmap.defined_at(y) else None for y in orbit]
        report.entries.append(_sampled_entry(n, [sums[i] for i in alive], [points[i] for i in alive], r))


def _sampled_entry(n: int, values: Sequence[ExactNumber], points: Sequence[Any], r: Any) -> SweepEntry:
    if not values:
        return SweepEntry(n, Fraction(0), None)
    idx = max(range(len(values)), key=lambda i: abs(values[i]))
    if r == INF:
        return SweepEntry(n, abs(values[idx]), points[idx])
    with mpmath.workdps(30):
        power = to_mpf(r)
        mean = mpmath.fsum(abs(to_mpf(v)) ** power for v in values) / len(values)
        return SweepEntry(n, mean ** (1 / power), points[idx])


def _sweep_states(
    t: SimplexTranslation, values: Observable, r: Any, n_max: int, report: CocycleReport, count: int
) -> None:
    """Exact sums along orbits of a deterministic grid of simplex states"""
    report.sampled = True
    report.sample_count = count
    starts = t.orbit(t.origin(), count)
    sums: List[ExactNumber] = [Fraction(0)] * count
    states = list(starts)
    for n in range(1, n_max + 1):
        for i, state in enumerate(states):
            sums[i] = sums[i] + t.observe(values, state)  # type: ignore[arg-type]
            states[i] = t.step(state)
        entry = _sampled_entry(n, sums, list(range(count)), r)
        report.entries.append(SweepEntry(n, entry.norm, None))


def schmidt_tightness(
    t: Transform, f: StepFunction, eps: Any, n_max: int, two_sided: bool = False
) -> TightnessReport:
    eps = as_exact(eps)
    if not 0 < eps < 1:
        raise ConfigError(f"eps must lie in (0,1), got {eps}")
    report = TightnessReport(eps=eps)
    tmap = t.interval_map
    for n, s_n, region in iterate_sums(f, tmap, n_max):
        report.entries.append((n, distribution_bound(s_n, region, eps)))
    if two_sided:
        for n, t_n, region in backward_sums(f, tmap, n_max):
            report.backward.append((n, distribution_bound(t_n, region, eps)))
    values = [a for _, a in report.entries]
    if values:
        half = max(1, len(values) // 2)
        early = max(values[: len(values) - half + 1])
        report.tight_candidate = max(values) <= early
    logger.info("tightness_completed", n_max=n_max, eps=str(eps), tight=report.tight_candidate)
    return report


def distribution_bound(g: StepFunction, region: IntervalSet, eps: ExactNumber) -> ExactNumber:
    """Least A with measure{x in region : |g(x)| <= A} >= (1 - eps) measure(region)"""
    total = region.measure
    if not total:
        return Fraction(0)
    restricted = g.restrict(region)
    target = (1 - eps) * total
    covered = total - restricted.support.measure
    if covered >= target:
        return Fraction(0)
    by_value: Dict[ExactNumber, ExactNumber] = {}
    for lo, hi, v in restricted.atoms:
        key = abs(v)
        by_value[key] = by_value.get(key, Fraction(0)) + (hi - lo)
    for value in sorted(by_value):
        covered = covered + by_value[value]
        if covered >= target:
            return value
    return max(by_value)


def sampled_sup(
    t: Transform, f: Callable[[Any], Any], n: int, points: Sequence[Any]
) -> float:
    """max_x |S_n f(x)| over points for a callable observable"""
    best = 0.0
    for x in points:
        total = 0.0
        y = x
        for _ in range(n):
            total += float(f(y))
            y = t.apply(y)
        best = max(best, abs(total))
    return best