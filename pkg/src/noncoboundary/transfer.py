"""A coboundary in L1 whose transfer function is not integrable

For each n the orbit segments D_n, tau D_n, ..., tau^(n-1) D_n with
p(D_n) = (1/2)/n^3 are carved from disjoint runs of levels of one machine.
h_n is the indicator of the segment and H_N = sum_{n<=N} n^(3/2) h_n. Then
H_N - H_N∘tau^-1 = sum n^(3/2) (1_{D_n} - 1_{tau^n D_n}), whose L1 norms are
dominated by sum n^(-3/2), while ||H_N||_1 = (1/2) sum n^(-1/2) diverges.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Optional, Tuple

import mpmath

from src.config.settings import Settings, get_settings
from src.core.errors import MachineTooShallowError, PreconditionError, VerificationError
from src.measure.intervals import IntervalSet
from src.measure.numbers import ExactNumber, exact_to_json, sqrt_exact, to_mpf
from src.measure.step_functions import StepFunction
from src.noncoboundary.columns import ColumnGrid, Rect
from src.transforms.rank_one import RankOneMachine
from src.utils.logging import get_logger

logger = get_logger(__name__)


@dataclass
class OrbitBlock:
    """Column rectangles of D_n, of its orbit segment and of tau^n D_n"""

    n: int
    base: ColumnGrid
    orbit: ColumnGrid
    top: ColumnGrid
    weight: ExactNumber
    runs: int

    @property
    def identity_ok(self) -> bool:
        # h_n - h_n∘tau^-1 = 1_D - 1_{tau^n D} on levels >= 1
        h = self.orbit.mask.astype(int)
        shifted = self.orbit.image().mask.astype(int)
        rhs = self.base.mask.astype(int) - self.top.mask.astype(int)
        return bool(((h - shifted)[:, 1:] == rhs[:, 1:]).all())


def allocate_orbits(machine: RankOneMachine, n_max: int) -> List[OrbitBlock]:
    """Carve D_1..D_{n_max} from consecutive runs of levels starting at level 1"""
    w = Fraction(machine.width)
    H = machine.height
    cursor = 1
    blocks: List[OrbitBlock] = []
    for n in range(1, n_max + 1):
        need = Fraction(1, 2 * n**3)
        full, rem = divmod(need, w)
        widths = [w] * int(full) + ([rem] if rem else [])
        if cursor + len(widths) * n > H - 1:
            raise MachineTooShallowError(
                "tower allocation ran out of levels",
                {"n": n, "height": H, "needed_top": cursor + len(widths) * n},
            )
        base: List[Rect] = []
        orbit: List[Rect] = []
        top: List[Rect] = []
        for width in widths:
            base.append((Fraction(0), width, cursor, cursor + 1))
            orbit.append((Fraction(0), width, cursor, cursor + n))
            top.append((Fraction(0), width, cursor + n, cursor + n + 1))
            cursor += n
        blocks.append(
            OrbitBlock(
                n=n,
                base=ColumnGrid.from_rects(machine, base),
                orbit=ColumnGrid.from_rects(machine, orbit),
                top=ColumnGrid.from_rects(machine, top),
                weight=n * sqrt_exact(n),
                runs=len(widths),
            )
        )
    logger.debug("orbits_allocated", n_max=n_max, levels_used=cursor, height=H)
    return blocks


@dataclass
class TransferReport:
    n_max: int
    entries: List[Dict[str, Any]] = field(default_factory=list)
    dominating_partial: ExactNumber = Fraction(0)
    dominating_upper: float = 0.0
    final_identity_ok: bool = False

    @property
    def ok(self) -> bool:
        return self.final_identity_ok and all(
            e["increasing"] and e["above_divergence_witness"] and e["f_within_dominating"] and e["identity_ok"]
            for e in self.entries
        )

    def rows(self) -> List[Dict[str, Any]]:
        return [{"n": e["N"], "norm": e["H_norm_float"], "witness": e["f_norm_float"]} for e in self.entries]

    def to_json(self) -> Dict[str, Any]:
        return {
            "N_max": self.n_max,
            "entries": self.entries,
            "dominating_partial": exact_to_json(self.dominating_partial),
            "dominating_upper": self.dominating_upper,
            "final_identity_ok": self.final_identity_ok,
            "ok": self.ok,
        }


def l1_nonintegrable_transfer(
    machine: RankOneMachine, n_max: int, settings: Optional[Settings] = None
) -> Tuple[StepFunction, StepFunction, TransferReport]:
    """f_N = H_N - H_N∘tau^-1 and H_N, with the divergence and domination certificate"""
    settings = settings or get_settings()
    if n_max < 1:
        raise PreconditionError("N_max must be at least 1")
    blocks = allocate_orbits(machine, n_max)
    report = TransferReport(n_max=n_max)

    pieces: List[Tuple[IntervalSet, ExactNumber]] = []
    f = StepFunction.zero()
    H_norm: ExactNumber = Fraction(0)
    dominating: ExactNumber = Fraction(0)
    for block in blocks:
        n, weight = block.n, block.weight
        orbit_set = block.orbit.to_interval_set(machine)
        pieces.append((orbit_set, weight))
        f = f + StepFunction.indicator(block.base.to_interval_set(machine), weight)
        f = f - StepFunction.indicator(block.top.to_interval_set(machine), weight)

        previous = H_norm
        H_norm = H_norm + weight * orbit_set.measure
        dominating = dominating + 2 * weight * block.base.measure
        f_norm = abs(f).integral()
        witness = sqrt_exact(n + 1) - 1
        report.entries.append(
            {
                "N": n,
                "H_norm": exact_to_json(H_norm),
                "H_norm_float": float(H_norm),
                "increasing": H_norm > previous,
                "divergence_witness": exact_to_json(witness),
                "above_divergence_witness": H_norm >= witness,
                "f_norm": exact_to_json(f_norm),
                "f_norm_float": float(f_norm),
                "dominating_partial": exact_to_json(dominating),
                "f_within_dominating": f_norm <= dominating,
                "identity_ok": block.identity_ok,
                "runs": block.runs,
            }
        )

    H = StepFunction.from_pieces(pieces)
    inverse = machine.interval_map.inverse()
    defect = (H - H.compose(inverse) - f).restrict(inverse.domain)
    with mpmath.workdps(settings.cocycle_precision):
        upper = to_mpf(dominating) + 2 / mpmath.sqrt(n_max)
    report.dominating_partial = dominating
    report.dominating_upper = float(upper)
    report.final_identity_ok = defect.sup_norm() == 0

    logger.info(
        "nonintegrable_transfer_built",
        n_max=n_max,
        H_norm=float(H_norm),
        dominating_upper=report.dominating_upper,
        ok=report.ok,
    )
    if not report.ok:
        raise VerificationError("non-integrable transfer certificate failed", {"N_max": n_max})
    return f, H, report
