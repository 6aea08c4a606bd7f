"""Separated-variable solutions of the Kramers equation

    u_t = nu u_yy - y u_x + (nu y + k x) u_y + nu u

with tools to evaluate and verify them.
"""
from importlib.metadata import PackageNotFoundError, version as _version

from .errors import (DomainError, EvaluationWarning, KramersError, NumericalError,
                     ValidationError)
from .model import KramersParams, RegimeReport, SchemeTag, classify, regime_constants
from .reduced import SeparatedSolution, SpectralPair, build_solution, eval_solution
from .separation import (CoordinateSystem, build_coordinate_system, check_constraint,
                         pair_coefficients)
from .timebasis import (ConstantsAB, RChoice, RFunction, TimeBasis, build_f_pair, build_R,
                        deriv, eval_basis, wronskian)

try:
    __version__ = _version("artifact")
except PackageNotFoundError:  # pragma: no cover - running from a source tree
    __version__ = "0.1.0"

__all__ = [
    "ConstantsAB", "CoordinateSystem", "DomainError", "EvaluationWarning", "KramersError",
    "KramersParams", "NumericalError", "RChoice", "RFunction", "RegimeReport", "SchemeTag",
    "SeparatedSolution", "SpectralPair", "TimeBasis", "ValidationError", "build_R",
    "build_coordinate_system", "build_f_pair", "build_solution", "check_constraint",
    "classify", "deriv", "eval_basis", "eval_solution", "pair_coefficients",
    "regime_constants", "wronskian", "__version__",
]
