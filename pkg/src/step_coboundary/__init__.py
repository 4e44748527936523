"""Explicit ergodic maps for which a finite-step mean-zero function is a coboundary"""

from src.step_coboundary.classify import (
    ALL_RATIONAL,
    INDEPENDENT,
    MIXED,
    Classification,
    Piece,
    Relation,
    classify_step_function,
    step_pieces,
)
from src.step_coboundary.extension import (
    ExtensionCoboundary,
    build_finite_extension_coboundary,
    skyscraper_set,
)
from src.step_coboundary.rational import RationalCoboundary, StageCheck, build_rational_coboundary
from src.step_coboundary.torus import TorusCoboundary, build_torus_coboundary

__all__ = [
    "ALL_RATIONAL",
    "INDEPENDENT",
    "MIXED",
    "Classification",
    "Piece",
    "Relation",
    "classify_step_function",
    "step_pieces",
    "TorusCoboundary",
    "build_torus_coboundary",
    "RationalCoboundary",
    "StageCheck",
    "build_rational_coboundary",
    "ExtensionCoboundary",
    "build_finite_extension_coboundary",
    "skyscraper_set",
]
