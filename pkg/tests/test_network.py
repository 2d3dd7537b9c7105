import itertools

import numpy as np
import pytest

from invlab.invariants import (
    PermutationTuple,
    eval_lu_mixed,
    eval_slocc_modsq_mixed,
    named_invariant,
)
from invlab.network import (
    SHOT_BATCH,
    DimensionCapError,
    NetworkConfig,
    apply_spa,
    circuit_expectation,
    lambda_map,
    network_expectation,
    pairwise_swap,
    permutation_operator,
    recover_modsq,
    sample_shots,
    spa_choi,
    spa_coefficients,
    spa_map,
    structured_expectation,
)
from invlab.states import (
    density_from_pure,
    haar_random_pure,
    make_density,
    make_pure,
    make_rng,
    named_state,
    random_mixed,
    tilde,
)
from invlab.tensor import kron

import oracles

QUARTIC = named_invariant("two_qubit_quartic")
QUAD = named_invariant("slocc_quadratic")
SWAP = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]])


def _bell_rho():
    return density_from_pure(named_state("bell"))


def _is_permutation_matrix(m):
    return set(np.unique(m)) <= {0, 1} and (m.sum(0) == 1).all() and (m.sum(1) == 1).all()


# permutation operators


def test_identity_tuple_gives_identity():
    spec = PermutationTuple(3, ((0, 1, 2), (0, 1, 2)))
    assert np.array_equal(permutation_operator(spec, [2, 2]), np.eye(64))


def test_quartic_operator_is_swap_on_party_b():
    # layout (A1, B1, A2, B2): identity on A1, A2 and SWAP on B1, B2
    p = permutation_operator(QUARTIC, [2, 2])
    ref = np.zeros((16, 16))
    for a1, b1, a2, b2 in itertools.product(range(2), repeat=4):
        ref[np.ravel_multi_index((a1, b2, a2, b1), (2,) * 4), np.ravel_multi_index((a1, b1, a2, b2), (2,) * 4)] = 1
    assert np.array_equal(p, ref)
    # reorder to (A1, A2, B1, B2) and compare with I (x) SWAP
    order = [0, 2, 1, 3]
    t = p.reshape((2,) * 8).transpose(order + [4 + k for k in order]).reshape(16, 16)
    assert np.array_equal(t, np.kron(np.eye(4), SWAP))


def test_three_cycle_matches_ket_definition():
    spec = PermutationTuple(3, ((1, 2, 0),))
    p = permutation_operator(spec, [2])
    for i1, i2, i3 in itertools.product(range(2), repeat=3):
        col = np.ravel_multi_index((i1, i2, i3), (2, 2, 2))
        row = np.ravel_multi_index((i2, i3, i1), (2, 2, 2))
        assert p[row, col] == 1 and p[:, col].sum() == 1


def test_permutation_operator_matches_oracle():
    rng = np.random.default_rng(20)
    for dims in ([2, 2], [2, 3], [2, 2, 2], [3]):
        for _ in range(5):
            r = int(rng.integers(1, 4))
            perms = tuple(tuple(rng.permutation(r)) for _ in dims)
            p = permutation_operator(PermutationTuple(r, perms), dims)
            assert np.array_equal(p, oracles.permutation_from_kets(perms, dims))
            assert _is_permutation_matrix(p)
            assert np.abs(p @ p.T - np.eye(len(p))).max() == 0


def test_permutation_operator_mismatch():
    with pytest.raises(ValueError):
        permutation_operator(QUARTIC, [2, 2, 2])


def test_pairwise_swap():
    s = pairwise_swap(2, [2, 2])
    v1, v2 = np.arange(4.0), np.arange(4.0)[::-1] + 10
    assert np.array_equal(s @ np.kron(v1, v2), np.kron(v2, v1))
    assert np.array_equal(s @ s, np.eye(16))
    s4 = pairwise_swap(4, [2])
    for bits in itertools.product(range(2), repeat=4):
        col = np.ravel_multi_index(bits, (2,) * 4)
        row = np.ravel_multi_index((bits[1], bits[0], bits[3], bits[2]), (2,) * 4)
        assert s4[row, col] == 1
    assert _is_permutation_matrix(s4)
    with pytest.raises(ValueError):
        pairwise_swap(3, [2])


# SPA


def test_spa_coefficients():
    p = spa_coefficients(1, 2)
    assert p.identity_weight == 8 / 9 and p.map_weight == 1 / 9
    p = spa_coefficients(2, 2)
    assert p.identity_weight == 64 / 65 and p.map_weight == 1 / 65
    p = spa_coefficients(3, 4)
    assert p.map_weight == 1 / (2**18 + 1)
    for n, r in [(1, 2), (2, 4), (3, 2)]:
        p = spa_coefficients(n, r)
        assert p.identity_weight > 0 and p.map_weight > 0
        assert abs(p.identity_weight + p.map_weight - 1) < 1e-15
    for n, r in [(0, 2), (1, 3), (1, 0)]:
        with pytest.raises(ValueError):
            spa_coefficients(n, r)


def test_lambda_map_on_products():
    for s in range(5):
        r1, r2 = random_mixed([2, 2], s), random_mixed([2, 2], 100 + s)
        out = lambda_map(np.kron(r1.matrix, r2.matrix), 2, 2)
        assert np.abs(out - np.kron(r1.matrix, tilde(r2).matrix)).max() < 1e-12
    r = [random_mixed([2], s).matrix for s in range(4)]
    out = lambda_map(kron(r), 1, 4)
    ref = kron([r[0], tilde(make_density(r[1], [2])).matrix, r[2], tilde(make_density(r[3], [2])).matrix])
    assert np.abs(out - ref).max() < 1e-12


def test_lambda_map_identity_and_involution():
    eye = np.eye(16) / 16
    assert np.abs(lambda_map(eye, 2, 2) - eye).max() < 1e-15
    rng = np.random.default_rng(21)
    for _ in range(10):
        x = rng.standard_normal((16, 16)) + 1j * rng.standard_normal((16, 16))
        assert np.abs(lambda_map(lambda_map(x, 1, 4), 1, 4) - x).max() < 1e-12
        assert abs(np.trace(lambda_map(x, 2, 2)) - np.trace(x)) < 1e-12


def test_apply_spa_examples():
    params = spa_coefficients(2, 2)
    eye = make_density(np.eye(16) / 16, [4, 4])
    assert np.abs(apply_spa(eye, params).matrix - eye.matrix).max() < 1e-15
    bb = np.kron(_bell_rho().matrix, _bell_rho().matrix)
    out = apply_spa(make_density(bb, [4, 4]), params)
    assert np.abs(out.matrix - (64 / 65 * np.eye(16) / 16 + bb / 65)).max() < 1e-15


@pytest.mark.parametrize("n", [1, 2])
def test_spa_choi_psd_and_trace_preserving(n):
    params = spa_coefficients(n, 2)
    choi = spa_choi(params)
    assert np.abs(choi - choi.conj().T).max() < 1e-15
    assert np.linalg.eigvalsh(choi).min() >= -1e-10
    rng = np.random.default_rng(22)
    d = 2 ** (2 * n)
    for _ in range(10):
        x = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        assert abs(np.trace(spa_map(x, params)) - np.trace(x)) < 1e-12


def test_spa_weights_sit_on_the_cp_boundary():
    # any larger map weight makes the Choi matrix indefinite
    params = spa_coefficients(1, 2)
    choi = spa_choi(params)
    assert abs(np.linalg.eigvalsh(choi).min()) < 1e-12
    bumped = type(params)(1, 2, params.identity_weight - 1e-3, params.map_weight + 1e-3)
    assert np.linalg.eigvalsh(spa_choi(bumped)).min() < -1e-5


# expectations


def test_network_examples():
    cfg = NetworkConfig(QUARTIC)
    assert abs(network_expectation(named_state("bell"), cfg) - 0.5) < 1e-12
    spa = NetworkConfig(QUAD, use_spa=True)
    assert abs(network_expectation(named_state("bell"), spa) - 17 / 65) < 1e-12
    assert abs(network_expectation(_bell_rho(), spa) - 17 / 65) < 1e-12
    ideal = NetworkConfig(QUAD, use_spa=False)
    assert abs(network_expectation(named_state("product"), ideal)) < 1e-15


def test_spa_example_by_direct_channel():
    # Tr(SWAP * SPA(P^dag rho^{x2} P)) built from dense matrices only
    bb = np.kron(_bell_rho().matrix, _bell_rho().matrix)
    out = spa_map(bb, spa_coefficients(2, 2))
    assert abs(np.trace(pairwise_swap(2, [2, 2]) @ out) - 17 / 65) < 1e-12


def test_network_matches_invariants_on_random_states():
    specs2 = [QUARTIC, QUAD, named_invariant("norm", 2), named_invariant("moment(1)"), named_invariant("moment(2)")]
    specs3 = [named_invariant("three_tangle"), named_invariant("norm", 3)]
    worst = 0.0
    for s in range(100):
        for dims, specs in (((2, 2), specs2), ((2, 2, 2), specs3)):
            for state in (haar_random_pure(dims, make_rng(30, s)), random_mixed(dims, make_rng(31, s))):
                rho = state if not hasattr(state, "amplitudes") else density_from_pure(state)
                for spec in specs:
                    try:
                        got = network_expectation(state, NetworkConfig(spec), method="structured")
                    except DimensionCapError:
                        continue
                    if spec.mode == "lu":
                        ref = eval_lu_mixed(rho, spec).real
                        im = network_expectation(state, NetworkConfig(spec, component="imaginary"), method="structured")
                        worst = max(worst, abs(im + eval_lu_mixed(rho, spec).imag))
                    else:
                        ref = eval_slocc_modsq_mixed(rho, spec)
                    worst = max(worst, abs(got - ref))
    assert worst <= 1e-9


def test_components_match_dense_definition():
    # Re Tr(P rho^{(x) r}) and Re Tr(i P rho^{(x) r}) from explicit matrices
    rng = np.random.default_rng(23)
    for s in range(10):
        dims = [(2, 2), (2, 3)][s % 2]
        rho = random_mixed(dims, s)
        r = 2 + s % 2
        spec = PermutationTuple(r, tuple(tuple(rng.permutation(r)) for _ in dims))
        tr = np.trace(permutation_operator(spec, dims) @ kron([rho.matrix] * r))
        assert abs(network_expectation(rho, NetworkConfig(spec)) - tr.real) < 1e-12
        im = network_expectation(rho, NetworkConfig(spec, component="imaginary"), method="structured")
        assert abs(im - (1j * tr).real) < 1e-12


def test_circuit_matches_structured():
    cfgs = [
        (NetworkConfig(QUARTIC), (2, 2)),
        (NetworkConfig(QUARTIC, component="imaginary"), (2, 2)),
        (NetworkConfig(PermutationTuple(3, ((0, 1, 2), (2, 0, 1)))), (2, 2)),
        (NetworkConfig(PermutationTuple(3, ((1, 0, 2), (2, 0, 1))), component="imaginary"), (2, 2)),
        (NetworkConfig(QUAD, use_spa=True), (2, 2)),
        (NetworkConfig(QUAD, use_spa=False), (2, 2)),
        (NetworkConfig(PermutationTuple(2, ((1, 0), (0, 1)), "slocc"), use_spa=False), (2, 2)),
        (NetworkConfig(PermutationTuple(4, ((0, 1, 2, 3),), "slocc"), use_spa=True), (2,)),
        (NetworkConfig(PermutationTuple(4, ((2, 0, 3, 1),), "slocc"), use_spa=False), (2,)),
        (NetworkConfig(PermutationTuple(2, ((0, 1),) * 3, "slocc"), use_spa=True), (2, 2, 2)),
    ]
    for s in range(10):
        for cfg, dims in cfgs:
            for state in (haar_random_pure(dims, s), random_mixed(dims, s)):
                a = structured_expectation(state, cfg)
                b = circuit_expectation(state, cfg)
                assert abs(a - b) <= 1e-10


def test_dimension_cap(monkeypatch):
    ghz = density_from_pure(named_state("ghz", n=3))
    with pytest.raises(DimensionCapError):
        network_expectation(ghz, NetworkConfig(named_invariant("three_tangle")))
    monkeypatch.setenv("INVLAB_DIM_CAP", str(2**24))
    assert abs(network_expectation(ghz, NetworkConfig(named_invariant("three_tangle"))) - 0.25) < 1e-10
    monkeypatch.setenv("INVLAB_DIM_CAP", "16")
    assert abs(network_expectation(named_state("bell"), NetworkConfig(QUARTIC)) - 0.5) < 1e-12
    with pytest.raises(DimensionCapError):
        network_expectation(named_state("ghz", n=3), NetworkConfig(PermutationTuple(2, ((0, 1),) * 3)))


def test_moment_mixed_out_of_range():
    rho = random_mixed([2, 2], 0)
    for m in (3, 4):
        with pytest.raises(DimensionCapError):
            network_expectation(rho, NetworkConfig(named_invariant(f"moment({m})")))
        psi = haar_random_pure([2, 2], m)
        assert network_expectation(psi, NetworkConfig(named_invariant(f"moment({m})"))) >= 0


def test_config_validation():
    with pytest.raises(ValueError):
        NetworkConfig(QUAD, component="imaginary")
    with pytest.raises(ValueError):
        NetworkConfig(QUARTIC, use_spa=True)
    with pytest.raises(ValueError):
        NetworkConfig(QUARTIC, shots=-1)
    with pytest.raises(ValueError):
        network_expectation(make_pure([1, 1, 0, 0], [2, 2], unnormalized=True), NetworkConfig(QUARTIC))
    with pytest.raises(ValueError):
        network_expectation(named_state("ghz", n=3), NetworkConfig(QUARTIC))
    with pytest.raises(ValueError):
        network_expectation(haar_random_pure([2, 3], 0), NetworkConfig(QUAD))


# sampling and inversion


def test_sample_shots_examples():
    assert sample_shots(1.0, 1000, 1) == 1000
    assert sample_shots(-1.0, 1000, 1) == 0
    assert sample_shots(1 + 1e-13, 50, 1) == 50
    k = sample_shots(0.0, 10**6, 2)
    assert abs(k - 5 * 10**5) <= 4 * 500
    assert sample_shots(0.3, 12345, 9) == sample_shots(0.3, 12345, 9)
    with pytest.raises(ValueError):
        sample_shots(1.01, 10, 1)


def test_sample_shots_batches():
    shots = 2 * SHOT_BATCH + 17
    p = (1 + 0.2) / 2
    manual = sum(
        int(make_rng(5, k).binomial(n, p)) for k, n in enumerate([SHOT_BATCH, SHOT_BATCH, 17])
    )
    assert sample_shots(0.2, shots, 5) == manual
    # a prefix that ends on a batch boundary reuses the same draws
    assert sample_shots(0.2, SHOT_BATCH, 5) == int(make_rng(5, 0).binomial(SHOT_BATCH, p))


def test_recover_modsq_examples():
    r = recover_modsq(17 / 65, 2, 2)
    assert abs(r.value - 1) < 1e-12 and not r.below_zero
    r = recover_modsq(16 / 65, 2, 2)
    assert abs(r.value) < 1e-12
    r = recover_modsq(0.2, 2, 2)
    assert abs(r.value + 3) < 1e-12 and r.below_zero


def test_recover_modsq_inverts_network():
    for s in range(20):
        rho = random_mixed([2, 2], s)
        z = network_expectation(rho, NetworkConfig(QUAD, use_spa=True))
        assert abs(recover_modsq(z, 2, 2).value - eval_slocc_modsq_mixed(rho, QUAD)) < 1e-12
