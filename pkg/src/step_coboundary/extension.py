"""Coboundaries over two-floor extensions when one piece measure depends on the others

With beta_d = sum c_i beta_i, the dependent piece A_d is removed, the remaining
pieces are renormalized to a rotation and A_d comes back as the upper floor
over D = {x : 0 <= frac(sum c_i x_i) < beta_d}. Over the base, the first-return
function splits as f_alpha + a_d (1_D - p(D)); f_alpha is handled by the
torus construction and the skyscraper part is checked by sweep only.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from math import ceil, floor
from typing import Any, Dict, List, Optional, Sequence, Union

from src.cocycle.birkhoff import CocycleReport, SweepEntry, cocycle_norm_sweep, decide_verdict
from src.config.settings import Settings, get_settings
from src.core.errors import PreconditionError
from src.measure.intervals import IntervalSet, union_all
from src.measure.numbers import ExactNumber, exact_to_json, format_exact, frac_part
from src.measure.step_functions import StepFunction
from src.step_coboundary.classify import (
    ALL_RATIONAL,
    INDEPENDENT,
    Classification,
    Relation,
    classify_step_function,
)
from src.step_coboundary.torus import TorusCoboundary, build_torus_coboundary
from src.transforms.extension import FiniteExtension
from src.transforms.rotation import Rotation
from src.transforms.simplex import SimplexState, SimplexTranslation
from src.utils.logging import get_logger

logger = get_logger(__name__)

EVIDENCE = "evidence, not certificate"


@dataclass
class SampledSkyscraper:
    """D on a torus of dimension >= 2, seen along simplex orbits"""

    translation: SimplexTranslation
    coefficients: Dict[int, Fraction]
    height: ExactNumber

    def contains(self, state: SimplexState) -> bool:
        total: ExactNumber = Fraction(0)
        for j, c in self.coefficients.items():
            total = total + c * frac_part(state[j])
        return frac_part(total) < self.height

    def frequency(self, steps: int) -> Fraction:
        orbit = self.translation.orbit(self.translation.origin(), steps)
        return Fraction(sum(1 for state in orbit if self.contains(state)), steps)

    def sweep(self, n_max: int, samples: int, steps: int) -> CocycleReport:
        """Sums of 1_D - p along orbits, p the empirical frequency of D"""
        p = self.frequency(steps)
        t = self.translation
        report = CocycleReport(r="inf", sampled=True, sample_count=samples)
        states = t.orbit(t.origin(), samples)
        sums: List[Fraction] = [Fraction(0)] * samples
        for n in range(1, n_max + 1):
            for i, state in enumerate(states):
                sums[i] += (1 if self.contains(state) else 0) - p
                states[i] = t.step(state)
            report.entries.append(SweepEntry(n, max(abs(s) for s in sums), None))
        report.verdict = decide_verdict(report.entries, None, get_settings())
        report.notes.append(f"p(D) estimated as {p} over {steps} orbit steps")
        return report


@dataclass
class ExtensionCoboundary:
    classification: Classification
    relation: Optional[Relation] = None
    base: Optional[Union[Rotation, SimplexTranslation]] = None
    base_pieces: List[int] = field(default_factory=list)
    alphas: List[ExactNumber] = field(default_factory=list)
    skyscraper: Optional[Union[IntervalSet, SampledSkyscraper]] = None
    extension: Optional[FiniteExtension] = None
    target_measure: Optional[ExactNumber] = None
    f_alpha: Optional[StepFunction] = None
    f_beta: Optional[StepFunction] = None
    torus: Optional[TorusCoboundary] = None
    notes: List[str] = field(default_factory=list)

    @property
    def delegated(self) -> bool:
        return self.relation is None and self.torus is not None

    @property
    def skyscraper_measure(self) -> Optional[ExactNumber]:
        if isinstance(self.skyscraper, IntervalSet):
            return self.skyscraper.measure
        return None

    @property
    def dependent_value(self) -> ExactNumber:
        assert self.relation is not None
        return self.classification.pieces[self.relation.dependent].value

    def lifted(self) -> StepFunction:
        """f on the extension: base piece values below, a_d on the upper floor, minus the mean"""
        if self.extension is None:
            raise PreconditionError("no interval extension was built")
        values = self.classification.values
        base_f = StepFunction.from_pieces(
            zip(_base_intervals(self.alphas), [values[i] for i in self.base_pieces])
        )
        lifted = self.extension.lift_function(base_f, self.dependent_value)
        mean = lifted.integral()
        return lifted - StepFunction.constant(mean) if mean else lifted

    def sweep_f_beta(
        self, n_max: int, samples: Optional[int] = None, settings: Optional[Settings] = None
    ) -> CocycleReport:
        settings = settings or get_settings()
        if isinstance(self.skyscraper, SampledSkyscraper):
            report = self.skyscraper.sweep(
                n_max, samples or settings.sample_count, max(settings.sample_count, 16 * n_max)
            )
        else:
            if self.f_beta is None or self.base is None:
                raise PreconditionError("no skyscraper function to sweep")
            report = cocycle_norm_sweep(self.base, self.f_beta, "inf", n_max, settings=settings)
        report.notes.append(EVIDENCE)
        return report

    def sweep_lifted(self, n_max: int, settings: Optional[Settings] = None) -> CocycleReport:
        assert self.extension is not None
        report = cocycle_norm_sweep(self.extension, self.lifted(), "inf", n_max, settings=settings)
        report.notes.append(EVIDENCE)
        return report

    def to_json(self) -> Dict[str, Any]:
        if self.delegated:
            assert self.torus is not None
            return {**self.torus.to_json(), "notes": self.notes}
        return {
            "transform": self.extension.to_json() if self.extension else (self.base.to_json() if self.base else None),
            "relation": self.relation.to_json() if self.relation else None,
            "skyscraper": self.skyscraper.to_json() if isinstance(self.skyscraper, IntervalSet) else None,
            "transfer": {
                "kind": "linear",
                "f_alpha": self.f_alpha.to_json() if self.f_alpha else None,
                "coefficients": (
                    [exact_to_json(a) for a in self.torus.values] if self.torus else None
                ),
            },
            "certificate": {
                "bound": exact_to_json(self.torus.bound) if self.torus else None,
                "formula": "2m*sum|a_j|",
                "skyscraper_measure": (
                    exact_to_json(self.skyscraper_measure) if self.skyscraper_measure is not None else None
                ),
                "target_measure": exact_to_json(self.target_measure) if self.target_measure is not None else None,
                "skyscraper_criterion": EVIDENCE,
            },
            "notes": self.notes,
        }


def _base_intervals(alphas: Sequence[ExactNumber]) -> List[IntervalSet]:
    out: List[IntervalSet] = []
    lo: ExactNumber = Fraction(0)
    for a in alphas:
        out.append(IntervalSet([(lo, lo + a)]))
        lo = lo + a
    return out


def skyscraper_set(c: Fraction, height: ExactNumber) -> IntervalSet:
    """{x in [0,1) : frac(c x) < height} for a rational c != 0"""
    if c == 0:
        return IntervalSet.unit() if height > 0 else IntervalSet.empty()
    parts: List[IntervalSet] = []
    for k in range(floor(min(c, 0)) - 1, ceil(max(c, 0)) + 1):
        a, b = k / c, (k + height) / c
        lo, hi = min(a, b), max(a, b)
        parts.append(IntervalSet([(lo, hi)]) & IntervalSet.unit() if hi > 0 and lo < 1 else IntervalSet.empty())
    return union_all(parts)


def build_finite_extension_coboundary(
    f: StepFunction, classification: Optional[Classification] = None
) -> ExtensionCoboundary:
    classification = classification or classify_step_function(f)
    if classification.case == ALL_RATIONAL:
        raise PreconditionError("rational piece measures belong to the odometer construction")
    if classification.case == INDEPENDENT:
        result = ExtensionCoboundary(classification, torus=build_torus_coboundary(f, classification))
        result.notes.append("no rational relation: empty skyscraper, torus construction used")
        return result
    relation = classification.relation
    if relation is None:
        raise PreconditionError(
            "only a single rational relation among the measures is supported",
            details={"relations": [str(r) for r in classification.relations]},
        )
    if not relation.homogeneous:
        raise PreconditionError(
            "relation has a rational constant term", details={"relation": str(relation)}
        )

    measures = classification.measures
    d = relation.dependent
    beta_d = measures[d]
    combined: ExactNumber = Fraction(0)
    for i, c in relation.coefficients.items():
        combined = combined + c * measures[i]
    if combined != beta_d:
        raise PreconditionError("relation coefficients are inconsistent", details={"relation": str(relation)})

    base_pieces = [i for i in range(len(measures)) if i != d]
    alphas = [measures[i] / (1 - beta_d) for i in base_pieces]
    values = classification.values
    a_d = values[d]
    result = ExtensionCoboundary(
        classification,
        relation=relation,
        base_pieces=base_pieces,
        alphas=alphas,
        target_measure=beta_d / (1 - beta_d),
    )
    result.notes.append(f"relation {relation}")

    if len(base_pieces) > 2:
        t = SimplexTranslation(alphas)
        coordinates = {base_pieces.index(i): c for i, c in relation.coefficients.items()}
        result.base = t
        result.skyscraper = SampledSkyscraper(t, coordinates, beta_d)
        result.notes.append(f"base torus has dimension {t.m - 1}: skyscraper checked on sampled states")
        logger.info("extension_coboundary_built", base=t.name, sampled=True)
        return result

    c = next(iter(relation.coefficients.values()))
    rotation = Rotation(alphas[0])
    D = skyscraper_set(c, beta_d)
    p_d = D.measure
    result.base = rotation
    result.skyscraper = D
    result.extension = FiniteExtension(rotation, D)
    result.f_beta = StepFunction.indicator(D) - StepFunction.constant(p_d)
    result.f_alpha = StepFunction.from_pieces(
        zip(_base_intervals(alphas), [values[j] + a_d * p_d for j in base_pieces])
    )
    if p_d != result.target_measure:
        result.notes.append(
            f"p(D) = {format_exact(p_d)} differs from the floor measure "
            f"{format_exact(result.target_measure)} required for an isomorphism onto f"
        )
    mean = result.f_alpha.integral()
    if mean == 0:
        result.torus = build_torus_coboundary(result.f_alpha)
    else:
        result.notes.append(f"f_alpha has mean {format_exact(mean)}: no torus certificate")
    logger.info(
        "extension_coboundary_built",
        base=rotation.name,
        skyscraper=str(D),
        skyscraper_measure=format_exact(p_d),
        certified=result.torus is not None,
    )
    return result
