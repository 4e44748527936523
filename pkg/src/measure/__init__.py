"""Exact measure-theoretic primitives: numbers, interval sets and step functions"""

from src.measure.intervals import IntervalSet, interval_set, measure, union_all
from src.measure.numbers import (
    ExactNumber,
    QuadIrrational,
    as_exact,
    exact_from_json,
    exact_to_json,
    format_exact,
    parse_exact,
)
from src.measure.polynomials import PiecewisePolynomial, as_polynomial
from src.measure.sources import FunctionSource, affine_source, refine, square_source, step_source
from src.measure.step_functions import StepFunction, evaluate, lr_norm, step_function

__all__ = [
    "ExactNumber",
    "QuadIrrational",
    "as_exact",
    "exact_from_json",
    "exact_to_json",
    "format_exact",
    "parse_exact",
    "IntervalSet",
    "interval_set",
    "measure",
    "union_all",
    "StepFunction",
    "step_function",
    "evaluate",
    "lr_norm",
    "FunctionSource",
    "affine_source",
    "square_source",
    "step_source",
    "refine",
    "PiecewisePolynomial",
    "as_polynomial",
]
