"""Classification of finite-step functions by the arithmetic of their piece measures"""

from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from math import lcm
from typing import Any, Dict, List, Optional, Sequence

import sympy

from src.core.errors import PreconditionError
from src.measure.intervals import IntervalSet
from src.measure.numbers import (
    ExactNumber,
    exact_to_json,
    format_exact,
    is_rational,
    radicands,
    rational_coordinates,
)
from src.measure.step_functions import StepFunction
from src.utils.logging import get_logger

logger = get_logger(__name__)

ALL_RATIONAL = "all-rational"
INDEPENDENT = "rationally-independent"
MIXED = "mixed"


@dataclass
class Piece:
    support: IntervalSet
    value: ExactNumber

    @property
    def measure(self) -> ExactNumber:
        return self.support.measure


@dataclass
class Relation:
    """beta_dependent = constant + sum coefficients[i] * beta_i"""

    dependent: int
    coefficients: Dict[int, Fraction]
    constant: Fraction = Fraction(0)

    @property
    def homogeneous(self) -> bool:
        return self.constant == 0

    def __str__(self) -> str:
        terms = [f"{c}·β{i + 1}" for i, c in sorted(self.coefficients.items())]
        if self.constant:
            terms.insert(0, str(self.constant))
        return f"β{self.dependent + 1} = " + (" + ".join(terms) or "0")

    def to_json(self) -> Dict[str, Any]:
        return {
            "dependent": self.dependent,
            "coefficients": {str(i): str(c) for i, c in sorted(self.coefficients.items())},
            "constant": str(self.constant),
        }


@dataclass
class Classification:
    case: str
    pieces: List[Piece]
    relations: List[Relation] = field(default_factory=list)

    @property
    def measures(self) -> List[ExactNumber]:
        return [p.measure for p in self.pieces]

    @property
    def values(self) -> List[ExactNumber]:
        return [p.value for p in self.pieces]

    @property
    def relation(self) -> Optional[Relation]:
        return self.relations[0] if len(self.relations) == 1 else None

    @property
    def common_denominator(self) -> int:
        """lcm of the measure denominators (all-rational case)"""
        if self.case != ALL_RATIONAL:
            raise PreconditionError(f"no common denominator for the {self.case} case")
        return reduce(lcm, (Fraction(m).denominator for m in self.measures), 1)

    def to_json(self) -> Dict[str, Any]:
        return {
            "case": self.case,
            "measures": [exact_to_json(m) for m in self.measures],
            "values": [exact_to_json(v) for v in self.values],
            "relations": [r.to_json() for r in self.relations],
        }


def step_pieces(f: StepFunction) -> List[Piece]:
    """Level sets of f ordered by their left endpoints, the zero set included"""
    pieces = [Piece(support, value) for support, value in f.pieces]
    zero = f.support.complement()
    if zero.measure:
        pieces.append(Piece(zero, Fraction(0)))
    return sorted(pieces, key=lambda p: p.support.lower)


def _relations(measures: Sequence[ExactNumber]) -> List[Relation]:
    """Rational relations among 1, beta_1, ..., beta_k"""
    basis = radicands(measures)
    columns = [[Fraction(1)] + [Fraction(0)] * (len(basis) - 1)]
    for m in measures:
        coords = rational_coordinates(m)
        columns.append([coords.get(d, Fraction(0)) for d in basis])
    matrix = sympy.Matrix(
        [[sympy.Rational(col[row].numerator, col[row].denominator) for col in columns] for row in range(len(basis))]
    )
    out: List[Relation] = []
    for vector in matrix.nullspace():
        coefs = [Fraction(int(c.p), int(c.q)) for c in vector]
        dependent = max(i for i in range(1, len(coefs)) if coefs[i] != 0)
        lead = coefs[dependent]
        out.append(
            Relation(
                dependent=dependent - 1,
                coefficients={
                    i - 1: -c / lead for i, c in enumerate(coefs[1:dependent], start=1) if c != 0
                },
                constant=-coefs[0] / lead,
            )
        )
    return out


def classify_step_function(f: StepFunction) -> Classification:
    pieces = step_pieces(f)
    if f.integral() != 0:
        raise PreconditionError(
            "step function must have mean zero", details={"integral": format_exact(f.integral())}
        )
    if sum((p.measure for p in pieces), Fraction(0)) != 1:
        raise PreconditionError("pieces do not tile [0,1)")

    measures = [p.measure for p in pieces]
    if all(is_rational(m) for m in measures):
        result = Classification(ALL_RATIONAL, pieces)
    else:
        # the last measure is determined by the others
        relations = _relations(measures[:-1])
        result = Classification(MIXED if relations else INDEPENDENT, pieces, relations)
    logger.info(
        "step_function_classified",
        case=result.case,
        pieces=len(pieces),
        relations=[str(r) for r in result.relations],
    )
    return result
