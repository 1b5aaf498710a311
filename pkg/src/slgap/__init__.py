"""Fundamental spectral gap of Dirichlet Sturm-Liouville problems.

Library + CLI for computing the gap Gamma = lambda2 - lambda1 of
-u'' + (V0 + V) u = lambda w u with Dirichlet conditions, minimizing it
over single-well potentials and single-barrier densities, and checking
the step-function / secular-equation / Liouville-bound structure of the
minimizers numerically.
"""

from .coefficients import (
    Interval,
    PiecewiseFn,
    SingleBarrierSpec,
    SingleWellSpec,
    ValidationError,
    single_barrier_violations,
    single_well_violations,
    validate_single_barrier,
    validate_single_well,
)
from .solver import (
    Mesh,
    Problem,
    SolverError,
    SpectralPair,
    gap,
    solve,
    spectral_pair,
    wronskian_residual,
)

from .perturbation import (
    PerturbationDirection,
    eigenvalue_derivative,
    finite_difference_derivative,
    gap_derivative,
    perturbed_problem,
)
from .crossing import CrossingError, CrossingReport, find_crossings, ratio_monotonicity
from .step_spectrum import (
    StepProblem,
    count_eigenvalues_below,
    eigenvalues_step,
    secular_residual,
    step_eigenfunction,
    step_gap,
    step_spectrum_full,
)
from .optimizer import (
    Optimum,
    SearchSpace,
    corroborate_monotone_pwc,
    minimize_step_family,
    verify_stationarity,
)
from .liouville import (
    LiouvilleData,
    convexity_report,
    eigenvalue_equivalence_check,
    equality_condition_residual,
    lavine_bound,
    liouville_potential,
    transformed_eigenvalues,
    transformed_length,
)

__version__ = "0.1.0"
