"""Hecke-Maass Satake data, symmetric-power and Rankin-Selberg coefficients,
Lambda^2-sieve weights and mollifiers, with numerical verification sweeps."""

from .dirichlet import CoeffSeries, EulerLocal, convolve, dilate, euler_expand, invert_local
from .report import VerificationReport
from .satake import SatakeData, hecke_eigenvalue, hecke_prime_power, validate_kim_sarnak

__version__ = "0.1.0"

__all__ = [
    "CoeffSeries",
    "EulerLocal",
    "SatakeData",
    "VerificationReport",
    "convolve",
    "dilate",
    "euler_expand",
    "hecke_eigenvalue",
    "hecke_prime_power",
    "invert_local",
    "validate_kim_sarnak",
]
