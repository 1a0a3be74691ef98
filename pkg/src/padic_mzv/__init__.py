"""p-adic multi-zeta values and regularized p-adic iterated sums."""

from .mzv import FrobeniusEngine, FrobeniusSolution, ZetaValue
from .oracle import Composition, brute_gamma, brute_sigma
from .padic import PadicNumber, PrecisionBudget, from_rational
from .sigma import SigmaAlgebra, SigmaExpr
from .words import NCSeries

__version__ = "0.1.0"

__all__ = [
    "Composition",
    "FrobeniusEngine",
    "FrobeniusSolution",
    "NCSeries",
    "PadicNumber",
    "PrecisionBudget",
    "SigmaAlgebra",
    "SigmaExpr",
    "ZetaValue",
    "brute_gamma",
    "brute_sigma",
    "from_rational",
]
