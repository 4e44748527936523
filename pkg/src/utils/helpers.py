"""Helper utilities for the cocycle workbench"""

import hashlib
from fractions import Fraction
from typing import Any, Dict, List

import numpy as np
import orjson

from src.measure.intervals import IntervalSet
from src.measure.numbers import ExactNumber

# Sample grids use rationals with this denominator
SAMPLE_DENOMINATOR = 1 << 24


def canonical_json(data: Any) -> bytes:
    """Canonical JSON bytes: sorted keys, two-space indent, trailing newline; stray exact values become text"""
    return orjson.dumps(data, default=str, option=orjson.OPT_SORT_KEYS | orjson.OPT_INDENT_2) + b"\n"


def config_digest(data: Dict[str, Any]) -> str:
    """Stable short hash of a configuration document"""
    return hashlib.sha256(orjson.dumps(data, option=orjson.OPT_SORT_KEYS)).hexdigest()[:12]


def sample_fractions(count: int, seed: int) -> List[Fraction]:
    """``count`` reproducible rationals in [0, 1)"""
    rng = np.random.default_rng(seed)
    numerators = rng.integers(0, SAMPLE_DENOMINATOR, size=count)
    return [Fraction(int(k), SAMPLE_DENOMINATOR) for k in numerators]


def sample_points(region: IntervalSet, count: int, seed: int) -> List[ExactNumber]:
    """Reproducible exact points of ``region``, spread by measure"""
    total = region.measure
    if not total or count <= 0:
        return []
    out: List[ExactNumber] = []
    for u in sorted(sample_fractions(count, seed)):
        out.append(region.point_at_measure(u * total))
    return out

