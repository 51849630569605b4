"""Numerical laboratory for self-dual abelian Higgs vortices in 2D."""

from .energy import (PairState, degree, discrepancy_perturbative, energy_direct,
                     jacobian_base, jacobian_field, jacobian_l1_diff, l2_distance)
from .fields import (ComplexField, Grid, OneForm, ScalarField, TwoForm,
                     build_grid, d_oneform, d_scalar, hodge_star, integrate)
from .perturb import (Perturbation, apply_perturbation, bump_field,
                      gauge_transform, random_smooth_field, truncate_modulus)
from .taubes import (VortexSolution, ZeroSet, load_solution, radial_profile_oracle,
                     save_solution, solve_taubes, taubes_residual)
from .weights import VortexWeight

__version__ = "0.1.0"

__all__ = [
    "ComplexField", "Grid", "OneForm", "PairState", "Perturbation",
    "ScalarField", "TwoForm", "VortexSolution", "VortexWeight", "ZeroSet",
    "apply_perturbation", "build_grid", "bump_field", "d_oneform", "d_scalar",
    "degree", "discrepancy_perturbative", "energy_direct", "gauge_transform",
    "hodge_star", "integrate", "jacobian_base", "jacobian_field",
    "jacobian_l1_diff", "l2_distance", "load_solution", "radial_profile_oracle",
    "random_smooth_field", "save_solution", "solve_taubes", "taubes_residual",
    "truncate_modulus",
]
