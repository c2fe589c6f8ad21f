"""Distributed-order fractional diffusion toolkit.

Solves initial-boundary value problems whose time derivative is a Caputo
derivative averaged over orders in (0, 1) against a density mu.  The weak
solution is assembled per eigenmode from inverse-Laplace relaxation kernels
evaluated on a deformed integration contour, cross-checked against a
real-axis spectral-density route and an independent time-stepping scheme.
"""

from .errors import DomainError, NumericError, PreconditionError
from .kernel import (
    ContourSpec,
    KernelConfig,
    KernelTable,
    an_threshold,
    build_kernel_table,
    check_g0c,
    choose_contour,
    dEn_dt,
    eval_En_contour,
    eval_Gn_contour,
    eval_Gn_spectral,
    eval_kernel_block,
    mittag_leffler,
    phi_n,
)
from .oracle import GridField, OracleConfig, compare, l1_weights, solve_oracle
from .solver import (
    ProblemSpec,
    SolutionField,
    duhamel,
    estimate_decay_exponent,
    propagate_homogeneous,
    sobolev_norm_path,
    solve,
)
from .spectral import (
    EllipticCoefficients,
    SpectralBasis,
    build_exact_dirichlet,
    build_fd,
    fractional_norm,
    project,
    synthesize,
)
from .verify import SUITES, ExperimentReport, VerifyConfig, run_suites
from .weight import (
    WeightFunction,
    check_symbol_bounds,
    eval_mu,
    eval_sw,
    eval_w,
    make_box_weight,
    make_constant_weight,
    make_tapered_weight,
    vartheta_env,
    zeta_env,
    zeta_inv,
)

__version__ = "0.1.0"

__all__ = [
    "ContourSpec",
    "DomainError",
    "EllipticCoefficients",
    "ExperimentReport",
    "GridField",
    "KernelConfig",
    "KernelTable",
    "NumericError",
    "OracleConfig",
    "PreconditionError",
    "ProblemSpec",
    "SUITES",
    "SolutionField",
    "SpectralBasis",
    "VerifyConfig",
    "WeightFunction",
    "an_threshold",
    "build_exact_dirichlet",
    "build_fd",
    "build_kernel_table",
    "check_g0c",
    "check_symbol_bounds",
    "choose_contour",
    "compare",
    "dEn_dt",
    "duhamel",
    "estimate_decay_exponent",
    "eval_En_contour",
    "eval_Gn_contour",
    "eval_Gn_spectral",
    "eval_kernel_block",
    "eval_mu",
    "eval_sw",
    "eval_w",
    "fractional_norm",
    "l1_weights",
    "make_box_weight",
    "make_constant_weight",
    "make_tapered_weight",
    "mittag_leffler",
    "phi_n",
    "project",
    "propagate_homogeneous",
    "run_suites",
    "sobolev_norm_path",
    "solve",
    "solve_oracle",
    "synthesize",
    "vartheta_env",
    "zeta_env",
    "zeta_inv",
    "__version__",
]
