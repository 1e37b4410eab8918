# ./src/bsa/__init__.py

from src.bsa.errores import (
    BSAError, CertificateError, InfeasibleError, IterationLimitError, ProblemError,
    SingularBasisError, SolverError, UnboundedError
)
from src.bsa.lp_bsa import solve_lp_bsa, verify_lp_certificate
from src.bsa.minimax_core import MinimaxInstance, extract_support, solve_minimax, verify_saddle
from src.bsa.problem import hull_family, load_problem
from src.bsa.uniform_bsa import solve_uniform_bsa, verify_uniform_certificate
from src.bsa.unicity import check_strong_unicity, strong_unicity_gamma

__all__ = [
    "BSAError", "CertificateError", "InfeasibleError", "IterationLimitError", "ProblemError",
    "SingularBasisError", "SolverError", "UnboundedError",
    "MinimaxInstance", "solve_minimax", "extract_support", "verify_saddle",
    "load_problem", "hull_family",
    "solve_uniform_bsa", "verify_uniform_certificate",
    "solve_lp_bsa", "verify_lp_certificate",
    "strong_unicity_gamma", "check_strong_unicity",
]
