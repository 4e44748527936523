"""Explicit functions that are not coboundaries, with certified cocycle growth"""

from src.noncoboundary.columns import ColumnFunction, ColumnGrid, level_slice
from src.noncoboundary.escape import SlowEscapeSet, almost_invariant_grid, almost_invariant_set, slow_escape_set
from src.noncoboundary.growth import (
    SeriesNoncoboundary,
    SeriesStage,
    SlowGrowth,
    growth_rate,
    series_noncoboundary,
    slow_growth_function,
)
from src.noncoboundary.transfer import OrbitBlock, TransferReport, allocate_orbits, l1_nonintegrable_transfer

__all__ = [
    "ColumnFunction",
    "ColumnGrid",
    "level_slice",
    "SlowEscapeSet",
    "almost_invariant_grid",
    "almost_invariant_set",
    "slow_escape_set",
    "SeriesNoncoboundary",
    "SeriesStage",
    "SlowGrowth",
    "growth_rate",
    "series_noncoboundary",
    "slow_growth_function",
    "OrbitBlock",
    "TransferReport",
    "allocate_orbits",
    "l1_nonintegrable_transfer",
]
