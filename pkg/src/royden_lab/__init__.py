"""Hardy spaces on circular multiply connected domains.

Numerical harmonic measure, period matrices and conjugation on domains
bounded by circles; inner-outer factorization and zero-free forms;
gauge norms and their duals; Galerkin experiments on invariant subspaces.
"""

__version__ = "0.1.0"

from .errors import RoydenLabError
from .geometry import (
    BoundaryField,
    BoundarySampling,
    CircularDomain,
    annulus,
    load_domain,
    sample_boundary,
    unit_disk,
    validate_domain,
)
from .laplace import (
    HarmonicRep,
    HarmonicUnit,
    OmegaDensity,
    PeriodMatrix,
    analytic_completion,
    conjugation_correction,
    greens_function,
    harmonic_measure_density,
    harmonic_unit_basis,
    period,
    period_matrix,
    periods,
    q_functions,
    solve_dirichlet,
)
from .series import AnalyticRep, fit_analytic, fit_function
from .hardy import (
    ZeroFreeForm,
    affiliated_graph,
    blaschke_singular_split,
    divides,
    equivalent_inner,
    gcd_zero_based,
    inner_outer_factor,
    is_inner,
    is_invertible_inner,
    is_outer,
    omega_density,
    outer_from_log_modulus,
    saito_split,
    winding_vector,
    zero_based_inner,
)
from .gauge import GaugeNormSpec, check_gauge_axioms, dual_norm, dual_norm_report, gauge_eval
from .galerkin import (
    beurling_angle,
    build_space,
    cyclicity_distance,
    extract_inner_generator,
    generate_invariant_subspace,
)
