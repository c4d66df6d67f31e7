"""Contact order of plane curves against bicharacteristic flows, with
desk-scale verification of the sharp spectral-cluster restriction exponents
on the flat torus, the round sphere, and the 2D harmonic oscillator."""

from .exponents import baselines, hermite_exponent, predict, rho
from .symbols import (
    AdmissibilityReport,
    PhaseSpacePoint,
    SymbolModel,
    check_admissible,
    get_symbol,
)

__version__ = "0.1.0"

__all__ = [
    "AdmissibilityReport",
    "PhaseSpacePoint",
    "SymbolModel",
    "baselines",
    "check_admissible",
    "get_symbol",
    "hermite_exponent",
    "predict",
    "rho",
    "__version__",
]
