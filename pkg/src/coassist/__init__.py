"""Concurrence of assistance for four-qubit pure states.

Two parties keep a pair of qubits; the other two measure theirs and report
outcomes. This package computes how much average entanglement the keepers can
be left with, under joint measurements (csharp), local von Neumann
measurements (cflat), and four-outcome POVMs (povm_optimize); certifies when
local measurements already attain the joint optimum; and runs Monte-Carlo
campaigns over random states.
"""

from .assist import (
    CanonicalDecomposition,
    CflatResult,
    JointMeasurement,
    LocalBasis,
    LocalityCertificate,
    avg_concurrence,
    canonical_decomposition,
    cflat,
    cflat_given_w,
    communication_free_basis,
    csharp,
    csharp_fidelity,
    extract_local_basis,
    locality_certificate,
    rank2_local_basis,
    rank_class,
    report,
)
from .factor import (
    MAGIC_T,
    OrthoPhaseDecomp,
    TakagiFactorization,
    local_to_magic,
    magic_to_local,
    ortho_phase_decompose,
    takagi,
)
from .linalg import fidelity, haar_special_orthogonal, haar_unitary, nuclear_norm_2x2
from .mc import (
    McConfig,
    McStats,
    StateRecord,
    emit_histogram,
    run_batch,
    six_pair_average,
)
from .povm import (
    ConditionalState,
    Povm4,
    PovmResult,
    conditional_states,
    povm_optimize,
    povm_value,
    projective_povm,
)
from .state import (
    FIXTURE_NAMES,
    FourQubitPure,
    coeff_matrix,
    concurrence_pure,
    fixture,
    load_state,
    pair_permutation,
    parse_state,
    permute_parties,
    q_matrix,
    random_state,
    rho_ab,
    rho_cd,
    save_state,
    spin_flip_mixed,
    spin_flip_pure,
)

__all__ = [
    "CanonicalDecomposition",
    "CflatResult",
    "ConditionalState",
    "FIXTURE_NAMES",
    "FourQubitPure",
    "JointMeasurement",
    "LocalBasis",
    "LocalityCertificate",
    "MAGIC_T",
    "McConfig",
    "McStats",
    "OrthoPhaseDecomp",
    "Povm4",
    "PovmResult",
    "StateRecord",
    "TakagiFactorization",
    "avg_concurrence",
    "canonical_decomposition",
    "cflat",
    "cflat_given_w",
    "coeff_matrix",
    "communication_free_basis",
    "haar_special_orthogonal",
    "haar_unitary",
    "concurrence_pure",
    "conditional_states",
    "csharp",
    "csharp_fidelity",
    "emit_histogram",
    "extract_local_basis",
    "fidelity",
    "fixture",
    "load_state",
    "locality_certificate",
    "local_to_magic",
    "magic_to_local",
    "nuclear_norm_2x2",
    "ortho_phase_decompose",
    "pair_permutation",
    "parse_state",
    "permute_parties",
    "povm_optimize",
    "povm_value",
    "projective_povm",
    "q_matrix",
    "random_state",
    "rank2_local_basis",
    "rank_class",
    "report",
    "rho_ab",
    "rho_cd",
    "run_batch",
    "save_state",
    "six_pair_average",
    "spin_flip_mixed",
    "spin_flip_pure",
    "takagi",
]
