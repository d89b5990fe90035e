"""Divisibility and information-backflow toolbox for qubit Pauli dynamics.

Classifies single and tensor-product Pauli channels as CP-divisible,
P-divisible only, or not P-divisible, maps out divisibility diagrams for
mixtures of pure dephasing semigroups, and searches for trace-norm
revivals (backflow of information and its superactivation).
"""

__version__ = "0.1.0"

from .backend import backend_name
from .core import eigenvalues, pauli_compose, pauli_decompose, trace_norm
from .divisibility import (
    CP_DIVISIBLE,
    NOT_P_DIVISIBLE,
    P_DIVISIBLE_ONLY,
    UNDETERMINED,
    ConjugationSpec,
    DivisibilityVerdict,
    conjugation_matrix,
    cp_divisible,
    default_grid,
    kossakowski_from_rates,
    necessary_tensor_condition,
    p_divisible,
    positivity_functional_sample,
    standard_conjugations,
    sufficient_condition_check,
    tensor_p_divisible,
)
from .dynamics import (
    NonInvertibleDynamicsError,
    RateModel,
    apply_channel,
    apply_tensor_channel,
    choi_matrix,
    decay_factors,
    intertwiner_factors,
    is_cptp,
    numeric_generator_rates,
    rates_at,
)
from .mixtures import (
    P_STAR,
    BoundaryWeightsError,
    DiagramGrid,
    asymptotic_rate_coefficients,
    bisector_tensor_test,
    cp_region_test,
    descartes_sign_changes,
    diagram,
    mixture_eigenvalues,
    mixture_rates,
    numerator_alpha,
    numerator_beta,
    tensor_region_test,
)
from .witness import (
    HelstromSpec,
    SbfiReport,
    Trajectory,
    WitnessReport,
    detect_bfi,
    helstrom,
    sbfi_report,
    trajectory,
    verify_witness,
    witness_search,
)

__all__ = [name for name in dir() if not name.startswith("_")]
