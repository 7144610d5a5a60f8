"""Haar wavelet collocation for coupled singular fractional boundary value problems.

The package solves systems of the form

    D^a1 y + (k1 / x^g1) D^b1 y = f1(x, y, z)
    D^a2 z + (k2 / x^g2) D^b2 z = f2(x, y, z)

on (0, 1) with Caputo derivatives (1 < a <= 2, 0 < b <= 1), closed by
initial, Neumann-Dirichlet or four-point interior conditions, and reports
pointwise residual errors and their grid maxima across resolution levels.
"""

from .analysis import (
    ConvergenceTable,
    ResidualReport,
    SweepRow,
    absolute_error_vs_oracle,
    convergence_sweep,
    residual_at,
    residual_table,
)
from .assembly import (
    AssembledState,
    CoefficientVector,
    DiscreteSystem,
    InitialData,
    assemble,
    case1_intercepts,
    case2_slopes,
    initial_data,
    residual_system,
)
from .expressions import EvalError, ParseError, evaluate, parse, to_source
from .fractional import (
    caputo_linear_term,
    frac_integral_haar,
    gamma,
    integration_matrix,
    rl_integral_monomial,
)
from .haar import (
    Breakpoints,
    Resolution,
    WaveletIndex,
    breakpoints,
    collocation_points,
    decompose_index,
    haar_eval,
    haar_matrix,
    pairwise_inner_product,
    recompose_index,
)
from .problems import (
    EXPERIMENT_IDS,
    CaseI,
    CaseII,
    ConfigError,
    FractionalOrders,
    NeumannDirichlet,
    ProblemSpec,
    ProblemValidationError,
    PureIVP,
    SingularTerm,
    builtin_experiments,
    delta_case1,
    delta_case2,
    get_experiment,
    load_config,
    validate,
    with_orders,
)
from .solver import (
    SingularJacobianError,
    SolveResult,
    SolverConfig,
    condition_estimate_1norm,
    jacobian_fd,
    lu_solve,
    newton_solve,
)

__version__ = "0.1.0"

__all__ = [
    "AssembledState",
    "Breakpoints",
    "CaseI",
    "CaseII",
    "CoefficientVector",
    "ConfigError",
    "ConvergenceTable",
    "DiscreteSystem",
    "EXPERIMENT_IDS",
    "EvalError",
    "FractionalOrders",
    "InitialData",
    "NeumannDirichlet",
    "ParseError",
    "ProblemSpec",
    "ProblemValidationError",
    "PureIVP",
    "ResidualReport",
    "Resolution",
    "SingularJacobianError",
    "SingularTerm",
    "SolveResult",
    "SolverConfig",
    "SweepRow",
    "WaveletIndex",
    "absolute_error_vs_oracle",
    "assemble",
    "breakpoints",
    "builtin_experiments",
    "caputo_linear_term",
    "case1_intercepts",
    "case2_slopes",
    "collocation_points",
    "condition_estimate_1norm",
    "convergence_sweep",
    "decompose_index",
    "delta_case1",
    "delta_case2",
    "evaluate",
    "frac_integral_haar",
    "gamma",
    "get_experiment",
    "haar_eval",
    "haar_matrix",
    "initial_data",
    "integration_matrix",
    "jacobian_fd",
    "load_config",
    "lu_solve",
    "newton_solve",
    "pairwise_inner_product",
    "parse",
    "recompose_index",
    "residual_at",
    "residual_system",
    "residual_table",
    "to_source",
    "validate",
    "with_orders",
    "__version__",
]
