"""Holomorphic tetration and super-logarithm for real bases above e^(1/e)."""

from .cauchy_solver import SolverParams, TetrationTable, evaluate_strip, residual_report, solve
from .errors import DomainError, NumericalError, TetraError
from .fixpoint import Base, FixedPointData, multiplier, principal_fixed_point, validate_base
from .koenigs import KoenigsContext, chi, chi_inverse, regular_abel
from .special_functions import BranchPolicy, DomainC2, emit_iterate_family, iterate, sexp, slog
from .storage import load_table, save_table

__all__ = [
    "Base", "BranchPolicy", "DomainC2", "DomainError", "FixedPointData", "KoenigsContext",
    "NumericalError", "SolverParams", "TetraError", "TetrationTable", "chi", "chi_inverse",
    "emit_iterate_family", "evaluate_strip", "iterate", "load_table", "multiplier",
    "principal_fixed_point", "regular_abel", "residual_report", "save_table", "sexp", "slog",
    "solve", "validate_base",
]
