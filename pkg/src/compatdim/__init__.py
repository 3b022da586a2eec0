"""Compatibility of quantum measurements under dimension reduction."""
from .config import DEFAULT_TOL, Tolerances
from .povm import (JointPovm, Povm, PovmTuple, apply_noise, make_tuple, marginal, noisy, reduce,
                   validate, von_neumann)
from .compat import (CompatReport, Ensemble, SuperEnsemble, cloning_criterion, dimension_noise_threshold,
                     joint_measurability, noise_robustness, pair_effect_value, post_guess, prior_guess,
                     restricted_witness_check, witness_value)
from .cloning import boundary_residual, clone_choi_feasible, in_gamma_clone
from .constructions import (fourier_matrix, lambda_interval, mub_family, mub_truncation_isometry, spin_povms,
                            spin_system, zeta_lower_bound)
from .reductions import commutative_reduction, scalar_reduction, tverberg_partition
from .search import SearchBudget, bounds_summary, certify_R_at_least, falsify_Rbar_at_least

__version__ = "0.1.0"
