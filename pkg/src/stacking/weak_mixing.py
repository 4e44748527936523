"""Iterated tower construction of a weak mixing map with a coboundary

Stage 0 builds a W-TUB tower for f on [0,1). Each later stage takes the
residual f - g on the active tops (the full column sums), builds a TUB
tower for it paired with a TUB tower for f on the still untouched set, and
links the machine through both: the top strip of the residual tower's
column c continues into the bottom strip of column c of the other tower.
The transfer function g vanishes on orbit bottoms and satisfies
g(tau x) = g(x) - f(x), so f = g - g∘tau wherever tau is defined.
"""

from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

from src.config.settings import Settings, get_settings
from src.core.errors import PreconditionError
from src.diophantine.eigen import rational_eigenvalue_test
from src.measure.intervals import IntervalSet
from src.measure.numbers import ExactNumber, exact_floor, exact_to_json, format_exact
from src.measure.polynomials import Observable, PiecewisePolynomial, as_polynomial
from src.measure.sources import FunctionSource
from src.stacking.schedule import ScheduleParams
from src.stacking.towers import transfer_on_columns, tub_build, wtub_build
from src.transforms.base import ExplicitMap
from src.transforms.interval_map import PiecewiseTranslation
from src.utils.logging import StageLog, get_logger

logger = get_logger(__name__)

TEST_FREQUENCIES = (Fraction(1, 2), Fraction(1, 3))


def descend(tmap: PiecewiseTranslation, tops: IntervalSet) -> Tuple[PiecewiseTranslation, Dict[int, IntervalSet]]:
    """Map from ``tops`` to the bottoms of their orbits, and the orbit heights

    Heights are keyed by the number of levels of the orbit segment, tops
    included.
    """
    back = tmap.inverse()
    frontier = PiecewiseTranslation.identity(tops)
    done: List[Any] = []
    heights: Dict[int, IntervalSet] = {}
    depth = 0
    while len(frontier):
        deeper = back.compose(frontier)
        stopped = frontier.domain - deeper.domain
        if stopped:
            done.extend(frontier.restrict(stopped).branches)
            heights[depth + 1] = stopped
        frontier = deeper
        depth += 1
    return PiecewiseTranslation(done), heights


def transfer_from_map(f: PiecewisePolynomial, tmap: PiecewiseTranslation, covered: IntervalSet) -> PiecewisePolynomial:
    """g on ``covered``: zero on orbit bottoms and g(tau x) = g(x) - f(x) above them

    The sweep carries g only on the current layer of points, so each piece of
    the result is produced once.
    """
    current = covered - tmap.image
    layer = PiecewisePolynomial.zero()
    atoms: List[Any] = []
    while current:
        step = tmap.restrict(current)
        layer = (layer - f.restrict(step.domain)).restrict(step.domain).compose(step.inverse())
        atoms.extend(layer.atoms)
        current = step.image
    return PiecewisePolynomial(atoms)


def dyadic_refined(tmap: PiecewiseTranslation, tops: IntervalSet, k: int) -> bool:
    """Whether every level piece sits inside one dyadic interval of length 2^-k"""
    scale = 2**k
    pieces = [(lo, hi) for lo, hi, _ in tmap.branches] + list(tops)
    return all(hi * scale <= exact_floor(lo * scale) + 1 for lo, hi in pieces)


@dataclass
class WeakMixingResult:
    machine: ExplicitMap
    g: PiecewisePolynomial
    log: StageLog
    schedule: ScheduleParams
    covered: IntervalSet
    active_tops: IntervalSet
    residual: ExactNumber
    top_residual: ExactNumber

    @property
    def records(self) -> List[Dict[str, Any]]:
        return self.log.records

    @property
    def undefined_measure(self) -> ExactNumber:
        return 1 - self.machine.domain.measure

    @property
    def cauchy_ok(self) -> bool:
        return all(r.get("cauchy_ok", True) for r in self.records)

    @property
    def undefined_decreasing(self) -> bool:
        return all(r.get("undefined_decreased", True) for r in self.records)

    @property
    def ok(self) -> bool:
        return self.cauchy_ok and self.undefined_decreasing

    def write_log(self, path: Path) -> None:
        self.log.write(path)

    def to_json(self) -> Dict[str, Any]:
        return {
            "stages": len(self.records),
            "schedule": self.schedule.certificate(),
            "undefined_measure": exact_to_json(self.undefined_measure),
            "residual": exact_to_json(self.residual),
            "top_residual": exact_to_json(self.top_residual),
            "cauchy_ok": self.cauchy_ok,
            "undefined_decreasing": self.undefined_decreasing,
            "ok": self.ok,
            "machine": self.machine.to_json(),
        }


def _check_source(src: Observable, f: PiecewisePolynomial) -> None:
    finite = not src.infinitely_valued if isinstance(src, FunctionSource) else f.degree <= 0
    if finite:
        raise PreconditionError(
            "function takes finitely many values; use the step-coboundary constructions instead"
        )
    if f.integral() != 0:
        raise PreconditionError(
            "weak mixing coboundary needs a mean-zero function",
            {"integral": format_exact(f.integral())},
        )


class _Machine:
    """Mutable state of the iteration: map, covered set, active tops and transfer"""

    def __init__(self, f: PiecewisePolynomial, tmap: PiecewiseTranslation, covered: IntervalSet, tops: IntervalSet, g: PiecewisePolynomial):
        self.f = f
        self.tmap = tmap
        self.covered = covered
        self.tops = tops
        self.g = g

    @property
    def undefined(self) -> ExactNumber:
        return 1 - self.tmap.domain.measure

    def top_function(self) -> PiecewisePolynomial:
        return (self.f - self.g).restrict(self.tops)

    def residual(self) -> ExactNumber:
        domain = self.tmap.domain
        return (self.f - self.g + self.g.compose(self.tmap)).sup_norm(domain)


def _record(
    machine: _Machine, stage: int, schedule: ScheduleParams, heights: Dict[int, IntervalSet], width: ExactNumber, strips: int
) -> Dict[str, Any]:
    eps_k, _ = schedule.stage(stage)
    top_norm = machine.top_function().sup_norm(machine.tops)
    record: Dict[str, Any] = {
        "stage": stage,
        "heights": sorted(heights),
        "width": format_exact(width),
        "strips": strips,
        "undefined_measure": format_exact(machine.undefined),
        "top_norm": format_exact(top_norm),
        "top_norm_below_3eps_k": top_norm < 3 * eps_k,
        "dyadic_refined": dyadic_refined(machine.tmap, machine.tops, stage + 1),
        "eigen_tests": {str(q): rational_eigenvalue_test(heights, q) for q in TEST_FREQUENCIES},
        "residual": format_exact(machine.residual()),
    }
    if stage > 0:
        record["top_norm_below_3eps_prev"] = top_norm < 3 * schedule.eps[stage - 1]
    return record


def _extend(machine: _Machine, stage: int, schedule: ScheduleParams, settings: Settings) -> Tuple[ExactNumber, int]:
    """Stack a residual tower on the active tops and a fresh tower on the untouched set above it

    The residual levels sit on orbits taller than any earlier stage, so N_k
    bounds the denominator of both towers rather than their heights.
    """
    eps_k, N_k = schedule.stage(stage)
    f1 = machine.top_function()
    untouched = machine.covered.complement()
    paired = bool(untouched) and machine.f.restrict(untouched).degree > 0
    if paired:
        residual_tower, fresh_tower = tub_build(
            f1, machine.tops, eps_k, N_k, paired_with=(machine.f, untouched), settings=settings
        )
    else:
        residual_tower = tub_build(f1, machine.tops, eps_k, N_k, settings=settings, width_bound=True)
        fresh_tower = None

    down, _ = descend(machine.tmap, machine.tops)
    branches = list(machine.tmap.branches)
    columns = residual_tower.tower.columns
    for column in columns:
        for lower, upper in zip(column, column[1:]):
            link = down.restrict(upper).compose(PiecewiseTranslation.match_sets(lower, upper))
            branches.extend(link.branches)
    if fresh_tower is not None:
        for column, other in zip(columns, fresh_tower.tower.columns):
            branches.extend(PiecewiseTranslation.match_sets(column[-1], other[0]).branches)
        branches.extend(fresh_tower.interval_map().branches)
        machine.covered = machine.covered | fresh_tower.support
        machine.tops = fresh_tower.top
    else:
        machine.tops = residual_tower.top
    machine.tmap = PiecewiseTranslation(branches)
    return residual_tower.width, residual_tower.strips


def weak_mixing_coboundary(
    src: Observable,
    schedule: ScheduleParams,
    stages: int,
    settings: Optional[Settings] = None,
) -> WeakMixingResult:
    """Run ``stages`` stages of the construction and certify each one"""
    settings = settings or get_settings()
    f = as_polynomial(src)
    _check_source(src, f)
    if stages < 1:
        raise PreconditionError("at least one stage is needed")
    schedule.stage(stages - 1)

    log = StageLog("stage_built")
    eps0, N0 = schedule.stage(0)
    wtub = wtub_build(f, IntervalSet.unit(), eps0, N0, settings)
    tmap = wtub.interval_map()
    machine = _Machine(f, tmap, wtub.support, wtub.top, transfer_on_columns(f, wtub.tower.columns))
    _, heights = descend(machine.tmap, machine.tops)
    log.append(**_record(machine, 0, schedule, heights, wtub.width, wtub.strips))

    for stage in range(1, stages):
        old_g, old_covered, old_undefined = machine.g, machine.covered, machine.undefined
        width, strips = _extend(machine, stage, schedule, settings)
        machine.g = transfer_from_map(f, machine.tmap, machine.covered | machine.tops)
        _, heights = descend(machine.tmap, machine.tops)
        record = _record(machine, stage, schedule, heights, width, strips)
        bound = 3 * (schedule.eps[stage] + schedule.eps[stage - 1])
        cauchy = (machine.g - old_g).sup_norm(old_covered)
        record.update(
            cauchy=format_exact(cauchy),
            cauchy_bound=format_exact(bound),
            cauchy_ok=cauchy < bound,
            undefined_decreased=machine.undefined < old_undefined,
        )
        log.append(**record)

    result = WeakMixingResult(
        machine=ExplicitMap(machine.tmap, label=f"weak_mixing(stages={stages})"),
        g=machine.g,
        log=log,
        schedule=schedule,
        covered=machine.covered,
        active_tops=machine.tops,
        residual=machine.residual(),
        top_residual=machine.top_function().sup_norm(machine.tops),
    )
    logger.info(
        "weak_mixing_built",
        stages=stages,
        undefined=format_exact(result.undefined_measure),
        residual=format_exact(result.residual),
        cauchy_ok=result.cauchy_ok,
        ok=result.ok,
    )
    return result
