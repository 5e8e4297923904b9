"""Sequential Caputo h-difference systems: operators, solvers, positivity checks."""

from seqfrac.frac_core import (
    FracOrderPair,
    KernelTable,
    SampledSequence,
    StepGrid,
    caputo_diff,
    frac_sum,
    gen_binomial,
    h_factorial,
    phi,
    phi_tilde,
)
from seqfrac.solver import (
    General,
    KernelVariant,
    Linear,
    SeriesOptions,
    Semilinear,
    SystemSpec,
    Trajectory,
    compare_solvers,
    reconstruct_y,
    solve_linear_series,
    solve_recursive,
    solve_semilinear_series,
)
from seqfrac.positivity import (
    PositivityReport,
    Verdict,
    check_trajectory_positivity,
    local_positivity_criterion,
    nonneg_rhs_positivity_check,
)

__all__ = [
    "FracOrderPair", "KernelTable", "SampledSequence", "StepGrid", "caputo_diff", "frac_sum",
    "gen_binomial", "h_factorial", "phi", "phi_tilde", "General", "KernelVariant", "Linear",
    "SeriesOptions", "Semilinear", "SystemSpec", "Trajectory", "compare_solvers",
    "reconstruct_y", "solve_linear_series", "solve_recursive", "solve_semilinear_series",
    "PositivityReport", "Verdict", "check_trajectory_positivity", "local_positivity_criterion",
    "nonneg_rhs_positivity_check",
]
