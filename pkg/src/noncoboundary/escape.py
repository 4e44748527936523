"""Almost invariant sets and sets whose orbit unions grow slowly"""

from dataclasses import dataclass, field
from fractions import Fraction
from math import ceil
from typing import Any, Dict, List, Sequence, Tuple

from src.core.errors import MachineTooShallowError, PreconditionError, VerificationError
from src.measure.intervals import IntervalSet
from src.measure.numbers import as_exact, exact_to_json, format_exact, is_rational
from src.noncoboundary.columns import ColumnGrid
from src.transforms.interval_map import PiecewiseTranslation
from src.transforms.rank_one import RankOneMachine
from src.utils.logging import get_logger

logger = get_logger(__name__)

SET_CHECK_LIMIT = 64


def _rational(value: Any, name: str) -> Fraction:
    x = as_exact(value)
    if not is_rational(x):
        raise PreconditionError(f"{name} must be rational, got {format_exact(x)}")
    return Fraction(x)


def almost_invariant_grid(machine: RankOneMachine, delta: Any, n: int, eps: Any) -> Tuple[ColumnGrid, int]:
    """Set of measure delta made of runs of L >= n/eps levels, and L

    Runs are position slices [0, u) of blocks of L consecutive levels, spread
    evenly over the column. Inside a run only the top n levels can leave the
    run within n steps, so at most a fraction n/L <= eps of the set escapes.
    """
    delta, eps = _rational(delta, "delta"), _rational(eps, "eps")
    if not 0 < delta < 1:
        raise PreconditionError(f"delta must lie in (0,1), got {delta}")
    if eps <= 0:
        raise PreconditionError(f"eps must be positive, got {eps}")
    if n < 0:
        raise PreconditionError("n must be nonnegative")
    L = max(1, ceil(n / eps))
    blocks = machine.height // L
    run_mass = L * machine.width
    if blocks == 0 or delta > blocks * run_mass:
        raise MachineTooShallowError(
            f"machine of height {machine.height} cannot hold measure {delta} in runs of {L} levels",
            {"height": machine.height, "run_length": L, "delta": delta},
        )
    b = ceil(delta / run_mass)
    spacing = blocks // b
    u = delta / (b * L)
    rects = [(Fraction(0), u, s * spacing * L, s * spacing * L + L) for s in range(b)]
    return ColumnGrid.from_rects(machine, rects), L


def _stay_by_sets(inverse: PiecewiseTranslation, A: IntervalSet, n: int) -> IntervalSet:
    """A intersected with the preimages of A under tau, ..., tau^n"""
    stay = A
    for _ in range(n):
        stay = A & inverse.restrict(stay).image
    return stay


def almost_invariant_set(machine: RankOneMachine, delta: Any, n: int, eps: Any) -> IntervalSet:
    """A with p(A) = delta and p(A and tau^-1 A and ... and tau^-n A) >= (1 - eps) p(A)"""
    grid, run = almost_invariant_grid(machine, delta, n, eps)
    A = grid.to_interval_set(machine)
    inverse = machine.interval_map.inverse()
    stay = _stay_by_sets(inverse, A, n)
    need = (1 - Fraction(eps)) * A.measure
    if A.measure != Fraction(delta) or stay.measure < need:
        raise VerificationError(
            "almost invariant set failed its measure check",
            {"measure": A.measure, "stay": stay.measure, "need": need},
        )
    logger.info(
        "almost_invariant_set_built",
        delta=format_exact(A.measure),
        n=n,
        run_length=run,
        stay=format_exact(stay.measure),
    )
    return A


@dataclass
class SlowEscapeSet:
    """E = X minus the union of the blocks A_m, with its per-n certificate"""

    E: IntervalSet
    F: ColumnGrid
    gamma: Fraction
    blocks: List[Dict[str, Any]]
    entries: List[Dict[str, Any]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(e["ok"] for e in self.entries) and self.E.measure >= self.gamma / 2

    def to_json(self) -> Dict[str, Any]:
        return {
            "measure": exact_to_json(self.E.measure),
            "gamma": exact_to_json(self.gamma),
            "measure_at_least_gamma_half": self.E.measure >= self.gamma / 2,
            "blocks": self.blocks,
            "entries": self.entries,
            "ok": self.ok,
        }


def _check_schedule(eps: Sequence[Fraction]) -> None:
    if len(eps) < 2:
        raise PreconditionError("escape schedule needs eps_0 and at least one more term")
    bad = [n for n, e in enumerate(eps) if not 0 < e < Fraction(1, 4)]
    if bad:
        raise PreconditionError(
            "escape schedule needs 0 < eps_n < 1/4 so that gamma = 1 - 4 max eps_n is positive",
            {"n": bad[0], "eps": eps[bad[0]]},
        )
    if any(b > a for a, b in zip(eps, eps[1:])):
        raise PreconditionError("escape schedule must be non-increasing")


def _block_plan(eps: Sequence[Fraction]) -> Tuple[Fraction, List[Tuple[int, Fraction, int]]]:
    """gamma and the blocks (N_m, delta_m, horizon) of the construction"""
    top = len(eps) - 1
    delta1 = 2 * max(eps)
    gamma = 1 - 2 * delta1
    starts: List[int] = [1]
    deltas: List[Fraction] = [delta1]
    m = 1
    while True:
        threshold = gamma / 4 if m == 1 else gamma / 2 ** (2 * (m + 1))
        nxt = next((N for N in range(starts[-1] + 1, top + 1) if 2 * eps[N] <= threshold), None)
        if nxt is None:
            break
        starts.append(nxt)
        deltas.append(2 * eps[nxt])
        m += 1
    horizons = starts[1:] + [top]
    return gamma, list(zip(starts, deltas, horizons))


def slow_escape_set(
    machine: RankOneMachine, eps: Sequence[Any], set_check_limit: int = SET_CHECK_LIMIT
) -> SlowEscapeSet:
    """E with 1 - p(tau^-1 E or ... or tau^-n E) >= eps_n for n = 1..len(eps)-1

    ``eps[n]`` is eps_n; eps_0 only enters the size of the first block. The
    certified quantity is the measure of the points whose first n images
    avoid E, which bounds the complement of the union from below for every
    extension of the partial map.
    """
    schedule = [_rational(e, "eps") for e in eps]
    _check_schedule(schedule)
    gamma, plan = _block_plan(schedule)

    F = ColumnGrid.empty(machine)
    blocks: List[Dict[str, Any]] = []
    for m, (start, delta, horizon) in enumerate(plan, start=1):
        grid, run = almost_invariant_grid(machine, delta, horizon, Fraction(1, 2))
        F = F | grid
        blocks.append(
            {"m": m, "N": start, "delta": exact_to_json(delta), "horizon": horizon, "run_length": run}
        )
    F_set = F.to_interval_set(machine)
    E = F_set.complement()

    inverse = machine.interval_map.inverse()
    by_sets = IntervalSet.unit()
    entries: List[Dict[str, Any]] = []
    for n in range(1, len(schedule)):
        avoid = F.stay(n - 1).preimage().measure
        entry: Dict[str, Any] = {
            "n": n,
            "avoid": exact_to_json(avoid),
            "eps": exact_to_json(schedule[n]),
            "ok": avoid >= schedule[n],
        }
        if n <= set_check_limit:
            by_sets = inverse.restrict(F_set & by_sets).image
            if by_sets.measure != avoid:
                raise VerificationError(
                    "column and interval computations of the escape measure disagree",
                    {"n": n, "column": avoid, "sets": by_sets.measure},
                )
            entry["set_checked"] = True
        entries.append(entry)

    result = SlowEscapeSet(E=E, F=F, gamma=gamma, blocks=blocks, entries=entries)
    logger.info(
        "slow_escape_set_built",
        blocks=len(blocks),
        measure=format_exact(E.measure),
        verified=len(entries),
        ok=result.ok,
    )
    if not result.ok:
        failed = next((e for e in entries if not e["ok"]), None)
        raise VerificationError("slow escape certificate failed", {"entry": failed})
    return result
