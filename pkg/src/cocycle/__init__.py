"""Birkhoff sums, coboundary criteria and transfer functions"""

from src.cocycle.birkhoff import (
    CocycleReport,
    SweepEntry,
    TightnessReport,
    Verdict,
    birkhoff_sum,
    cocycle_norm_sweep,
    schmidt_tightness,
)
from src.cocycle.transfer import (
    CesaroTransfer,
    CoboundaryCheck,
    RewriteResult,
    algebraic_rewrite,
    cesaro_transfer,
    verify_coboundary,
)

__all__ = [
    "CocycleReport",
    "SweepEntry",
    "TightnessReport",
    "Verdict",
    "birkhoff_sum",
    "cocycle_norm_sweep",
    "schmidt_tightness",
    "CesaroTransfer",
    "CoboundaryCheck",
    "RewriteResult",
    "algebraic_rewrite",
    "cesaro_transfer",
    "verify_coboundary",
]
