"""Fractional variational calculus on uniform grids."""

from fracvar.euler_lagrange import (
    ResidualReport,
    memory_constancy,
    residual_approx_N,
    residual_corrected,
    residual_generalized,
    residual_rl,
    total_variation,
)
from fracvar.expansion import (
    ExpansionTermTable,
    HypothesisWarning,
    SmoothFunctionModel,
    frac_binomial,
    left_expansion_sum,
    right_weak_sum,
    term_table,
)
from fracvar.grid import GridFunction, MemoryWindow, Side, interior_mask
from fracvar.lagrangian import REGISTRY, Lagrangian, get_lagrangian
from fracvar.operators import (
    caputo_derivative,
    derivative_matrix,
    frac_integral,
    fractional_derivative,
    riesz_caputo_derivative,
    rl_caputo_gap,
    rl_derivative,
)
from fracvar.solver import (
    ProblemSpec,
    SolveResult,
    discretize_functional,
    functional_gradient,
    solve_direct,
    verify_extremal,
)
from fracvar.weak import (
    ConvergenceRecord,
    TestFunction,
    max_rows,
    pairing,
    proposition_check,
    series_pairing,
    theorem_check,
)

__all__ = [
    "REGISTRY",
    "ConvergenceRecord",
    "ExpansionTermTable",
    "GridFunction",
    "HypothesisWarning",
    "Lagrangian",
    "MemoryWindow",
    "ProblemSpec",
    "ResidualReport",
    "Side",
    "SmoothFunctionModel",
    "SolveResult",
    "TestFunction",
    "caputo_derivative",
    "derivative_matrix",
    "discretize_functional",
    "frac_binomial",
    "frac_integral",
    "fractional_derivative",
    "functional_gradient",
    "get_lagrangian",
    "interior_mask",
    "left_expansion_sum",
    "max_rows",
    "memory_constancy",
    "pairing",
    "proposition_check",
    "residual_approx_N",
    "residual_corrected",
    "residual_generalized",
    "residual_rl",
    "riesz_caputo_derivative",
    "right_weak_sum",
    "rl_caputo_gap",
    "rl_derivative",
    "series_pairing",
    "solve_direct",
    "term_table",
    "theorem_check",
    "total_variation",
    "verify_extremal",
]
