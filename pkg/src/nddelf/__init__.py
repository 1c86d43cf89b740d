"""Semi-analytic solvers for linear neutral delay differential equations.

Solves y'(t) = a*y(t) + b*y'(t - tau) + c*y(t - tau) with a prescribed
history on [-tau, 0] by an exact method of steps and by three truncated
residue-series methods (plain, and two tail-accelerated variants).
"""

from .charroots import (
    ImprovedPoleCorrection,
    Pole,
    PoleFamily,
    RefinementError,
    asymptotic_pole,
    build_pole_family,
    characteristic_derivative,
    characteristic_value,
    find_real_roots,
    improved_asymptotic_pole,
    improved_pole_correction,
    refine_pole,
)
from .core import (
    ExpPolyFunction,
    NddeProblem,
    ParseError,
    differentiate,
    evaluate,
    parse_function,
    weighted_exp_integral,
)
from .harness import ConfigError, ProblemConfig, main, parse_config
from .laurent import (
    LaurentError,
    TruncatedSeries,
    expand_rational,
    recentre,
    series_add,
    series_div,
    series_mul,
)
from .residues import (
    MultiplePoleError,
    Residue,
    ResidueAsymptotics,
    a2_closed_form,
    asymptotic_residue,
    modified_expansion,
    numerator_value,
    original_expansion,
    residue_at,
    residue_error_report,
)
from .solvers import (
    ExpressionSwellError,
    MosSolution,
    SeriesSolution,
    SolverConfig,
    SolverError,
    evaluate_solution,
    method_of_steps,
    mos_residual,
    solve_modified_lf,
    solve_original_lf,
    solve_pure_laplace,
)
from .tail import (
    PeriodicPiecewise,
    TailPolynomialSet,
    build_polynomials,
    tail_component,
)

__version__ = "0.1.0"
