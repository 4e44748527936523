"""Joint approximation of a rank-one map by a map with a prescribed coboundary

Given a height-N tower of sigma and K in {-1, 0, 1} constant on its levels,
each level j is cut into M strips R(j, i). With H = i on R(j, i), the map tau
sends R(j, i) to strip i+1, i-1 or i of the next level according to
K = -1, +1 or 0 on level j, so that H - H∘tau = K except on end strips.
The end strips of levels with K = -1 and K = +1 are paired off, which needs
as many levels of one sign as of the other.
"""

from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Dict, List

from src.core.errors import ConstructionError, MachineTooShallowError, PreconditionError
from src.measure.intervals import IntervalSet, union_all
from src.measure.numbers import ExactNumber, exact_to_json, format_exact
from src.measure.step_functions import StepFunction
from src.transforms.base import ExplicitMap
from src.transforms.interval_map import PiecewiseTranslation
from src.transforms.rank_one import RankOneMachine
from src.utils.logging import get_logger

logger = get_logger(__name__)


@dataclass
class JointReport:
    M: int
    N: int
    invariance: ExactNumber
    defect: ExactNumber
    end_mass: ExactNumber
    recheck_defect: ExactNumber
    measure_preserved: bool

    @property
    def invariance_bound(self) -> Fraction:
        return Fraction(2 * self.M, self.N)

    @property
    def defect_bound(self) -> Fraction:
        return Fraction(1, self.M)

    @property
    def ok(self) -> bool:
        return (
            self.invariance <= self.invariance_bound
            and self.defect <= self.defect_bound
            and self.end_mass <= self.defect_bound
            and self.recheck_defect == self.defect
            and self.measure_preserved
        )

    def to_json(self) -> Dict[str, Any]:
        return {
            "M": self.M,
            "N": self.N,
            "invariance": exact_to_json(self.invariance),
            "invariance_bound": exact_to_json(self.invariance_bound),
            "defect": exact_to_json(self.defect),
            "defect_bound": exact_to_json(self.defect_bound),
            "end_mass": exact_to_json(self.end_mass),
            "recheck_defect": exact_to_json(self.recheck_defect),
            "measure_preserved": self.measure_preserved,
            "ok": self.ok,
        }


@dataclass
class JointApproximation:
    tau: ExplicitMap
    H: StepFunction
    report: JointReport
    strips: List[List[IntervalSet]]

    def to_json(self) -> Dict[str, Any]:
        return {"tau": self.tau.to_json(), "H": self.H.to_json(), "report": self.report.to_json()}


def _level_signs(K: StepFunction, levels: List[IntervalSet]) -> List[int]:
    signs: List[int] = []
    for j, level in enumerate(levels):
        part = K.restrict(level)
        values = set(part.values())
        if not values:
            signs.append(0)
            continue
        if len(values) > 1 or part.support != level:
            raise PreconditionError(f"K is not constant on tower level {j}")
        value = values.pop()
        if value not in (-1, 1):
            raise PreconditionError(f"K takes value {format_exact(value)} outside {{-1, 0, 1}}")
        signs.append(int(value))
    if K.restrict(union_all(levels).complement()).support:
        raise PreconditionError("K must vanish off the tower levels")
    return signs


def _defect_by_strips(
    strips: List[List[IntervalSet]], H: StepFunction, K: StepFunction, tau: PiecewiseTranslation
) -> ExactNumber:
    total: ExactNumber = Fraction(0)
    for row in strips:
        for strip in row:
            x = strip.lower
            total = total + abs(H.evaluate(x) - H.evaluate(tau.apply(x)) - K.evaluate(x)) * strip.measure
    return total


def joint_approximation_construct(sigma: RankOneMachine, K: StepFunction, M: int, N: int) -> JointApproximation:
    """tau and H with H nearly sigma-invariant and H - H∘tau nearly K"""
    if M < 1 or N < 1:
        raise PreconditionError("M and N must be positive")
    if sigma.height < N:
        raise MachineTooShallowError(
            f"machine of height {sigma.height} has no tower of height {N}", {"height": sigma.height, "N": N}
        )
    levels = list(sigma.levels[:N])
    signs = _level_signs(K, levels)
    minus = [j for j, s in enumerate(signs) if s == -1]
    plus = [j for j, s in enumerate(signs) if s == 1]
    if len(minus) != len(plus):
        raise ConstructionError(
            "K does not have zero mean on the tower", {"minus_levels": len(minus), "plus_levels": len(plus)}
        )

    strips = [level.split_measure(M) for level in levels]
    H = StepFunction.from_pieces((strip, i + 1) for row in strips for i, strip in enumerate(row))

    def nxt(j: int) -> int:
        return (j + 1) % N

    branches: List[Any] = []

    def link(src: IntervalSet, dst: IntervalSet) -> None:
        branches.extend(PiecewiseTranslation.match_sets(src, dst).branches)

    for j, sign in enumerate(signs):
        row, target = strips[j], strips[nxt(j)]
        for i in range(M):
            if sign == 0:
                link(row[i], target[i])
            elif sign == -1 and i < M - 1:
                link(row[i], target[i + 1])
            elif sign == 1 and i > 0:
                link(row[i], target[i - 1])
    end_mass: ExactNumber = Fraction(0)
    for down, up in zip(minus, plus):
        # top strip of a -1 level and bottom strip of a +1 level swap targets
        link(strips[down][M - 1], strips[nxt(up)][M - 1])
        link(strips[up][0], strips[nxt(down)][0])
        end_mass = end_mass + strips[down][M - 1].measure + strips[up][0].measure
    tau = PiecewiseTranslation(branches)

    sigma_map = sigma.interval_map
    invariance = abs((H - H.compose(sigma_map)).restrict(sigma_map.domain)).integral()
    defect = abs((H - H.compose(tau) - K).restrict(tau.domain)).integral()
    report = JointReport(
        M=M,
        N=N,
        invariance=invariance,
        defect=defect,
        end_mass=end_mass,
        recheck_defect=_defect_by_strips(strips, H, K, tau),
        measure_preserved=tau.domain.measure == tau.image.measure == union_all(levels).measure,
    )
    logger.info(
        "joint_approximation_built",
        M=M,
        N=N,
        invariance=format_exact(invariance),
        defect=format_exact(defect),
        ok=report.ok,
    )
    return JointApproximation(ExplicitMap(tau, label=f"joint(M={M}, N={N})"), H, report, strips)
