"""Jamming covariance estimators: SCM, rank-2 EVD, PEM-GD and PEM-AO."""

from .covariance import METHODS, JcmEstimate, evd_estimate, hermitian, psd_part, scm
from .numerics import (LineSearchResult, backtracking_search, finite_difference_gradient,
                       solve_cubic_real)
from .pem_ao import (PemAoState, c_objective, c_subproblem_bruteforce, kkt_scalars, pem_ao,
                     pem_ao_c_subproblem, pem_ao_model, pem_ao_objective, pem_ao_omega_gradient)
from .pem_gd import PemGdState, pem_gd, pem_gd_gradients, pem_gd_model, pem_gd_objective

__all__ = [
    "METHODS", "JcmEstimate", "scm", "evd_estimate", "hermitian", "psd_part",
    "LineSearchResult", "backtracking_search", "finite_difference_gradient", "solve_cubic_real",
    "PemGdState", "pem_gd", "pem_gd_gradients", "pem_gd_model", "pem_gd_objective",
    "PemAoState", "pem_ao", "pem_ao_c_subproblem", "pem_ao_model", "pem_ao_objective",
    "pem_ao_omega_gradient", "kkt_scalars", "c_objective", "c_subproblem_bruteforce",
]
