"""Polynomial LU and SLOCC invariants of multi-party states and the networks that measure them."""

from .invariants import (
    PermutationTuple,
    diagram,
    eval_lu_mixed,
    eval_lu_pure,
    eval_slocc_modsq_mixed,
    eval_slocc_pure,
    evaluate,
    named_invariant,
)
from .network import (
    NetworkConfig,
    apply_spa,
    network_expectation,
    pairwise_swap,
    permutation_operator,
    recover_modsq,
    sample_shots,
    spa_coefficients,
)
from .states import (
    DensityMatrix,
    PureState,
    bloch_decompose,
    density_from_pure,
    haar_random_pure,
    make_density,
    make_pure,
    named_state,
    tilde,
)

__version__ = "0.1.0"

__all__ = [
    "apply_spa",
    "bloch_decompose",
    "density_from_pure",
    "DensityMatrix",
    "diagram",
    "eval_lu_mixed",
    "eval_lu_pure",
    "eval_slocc_modsq_mixed",
    "eval_slocc_pure",
    "evaluate",
    "haar_random_pure",
    "make_density",
    "make_pure",
    "named_invariant",
    "named_state",
    "network_expectation",
    "NetworkConfig",
    "pairwise_swap",
    "permutation_operator",
    "PermutationTuple",
    "PureState",
    "recover_modsq",
    "sample_shots",
    "spa_coefficients",
    "tilde",
]
