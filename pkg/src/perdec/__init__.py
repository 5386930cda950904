"""Periodic decompositions for commuting operators, grid functions and
one-parameter matrix semigroups, with auditable certificates."""

__version__ = "0.1.0"

from .decomp import (DecompositionResult, GridFunction, OperatorFamily, continuity_defect,
                     decompose_grid_function, decompose_oracle, decompose_vector,
                     difference_defect, grid_difference_defect)
from .ergodic import (jdlg_split, kernel_power_collapse, mean_ergodic_projection,
                      power_bounded_verdict, zero_element_check)
from .estimators import GridPeriodicDecomposer, PeriodicDecomposer
from .linalg import (Subspace, kernel_basis, matrix_exp, spectrum, subspace_membership,
                     subspace_sum)
from .onepar import (PeriodSpec, SemigroupSpec, growth_bound, reduce_periods,
                     semigroup_decompose)

__all__ = [
    "DecompositionResult", "GridFunction", "GridPeriodicDecomposer", "OperatorFamily",
    "PeriodSpec", "PeriodicDecomposer", "SemigroupSpec", "Subspace", "continuity_defect",
    "decompose_grid_function", "decompose_oracle", "decompose_vector", "difference_defect",
    "grid_difference_defect", "growth_bound", "jdlg_split", "kernel_basis",
    "kernel_power_collapse", "matrix_exp", "mean_ergodic_projection", "power_bounded_verdict",
    "reduce_periods", "semigroup_decompose", "spectrum", "subspace_membership", "subspace_sum",
    "zero_element_check",
]
