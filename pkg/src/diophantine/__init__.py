"""Continued fractions, simultaneous approximation, Fourier transfer and eigenvalue checks"""

from src.diophantine.approximation import Approximation, find_approximation, simultaneous_approximation
from src.diophantine.continued_fraction import (
    ContinuedFraction,
    continued_fraction_expand,
    convergent_for_gap,
    distance_to_integer,
)
from src.diophantine.eigen import EigenvalueCheck, eigenvalue_witness, rational_eigenvalue_test
from src.diophantine.fourier import (
    FourierProfile,
    FourierTransfer,
    ObstructionReport,
    diophantine_obstruction,
    rho_profile,
    rotation_transfer_fourier,
)

__all__ = [
    "Approximation",
    "find_approximation",
    "simultaneous_approximation",
    "ContinuedFraction",
    "continued_fraction_expand",
    "convergent_for_gap",
    "distance_to_integer",
    "EigenvalueCheck",
    "eigenvalue_witness",
    "rational_eigenvalue_test",
    "FourierProfile",
    "FourierTransfer",
    "ObstructionReport",
    "diophantine_obstruction",
    "rho_profile",
    "rotation_transfer_fourier",
]
