"""Commutator-based stability certificates for discrete-time switched linear
systems under a minimum dwell time, with enumeration and simulation checks."""

from .certificate import (
    CERTIFIED,
    NOT_CERTIFIED,
    Certificate,
    EpsilonTable,
    SubsystemFamily,
    certify,
    compute_k_scalars,
    corollary_lhs,
    epsilon_table,
    find_lambda,
    find_m,
    schur_screen,
    theorem_lhs,
)
from .errors import DwellCertError
from .linalg_core import NormValue, commutator, mat_mul, mat_pow, norm2, spectral_norm
from .reporting import example_family, load_family, perturbed_example_family, save_family
from .switching_sim import (
    SwitchingSignal,
    TrajectoryRecord,
    brute_force_bound_check,
    compute_basis_c,
    enumerate_admissible_words,
    generate_signal,
    monte_carlo,
    simulate,
)
from .word_rewriter import (
    BlockWord,
    audit_counts,
    choose_target,
    decompose,
    evaluate_decomposition,
    parse_word,
    validate_dwell,
)

__version__ = "0.1.0"
