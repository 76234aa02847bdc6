import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from vibronic.fragmentation import (
    DiagonalizerRecipe,
    clifford_matrix,
    conjugate_fragment,
    diagonalizer_for,
    fragment_matrix,
    fragment_of,
    fragments,
    verify_block_diagonal,
)
from vibronic.grid import GridConfig, build_potential_matrix
from vibronic.model import VibronicModel

from .conftest import mi, random_model

H1 = np.array([[1, 1], [1, -1]]) / np.sqrt(2)


def kron_qubits(ops, n):
    """Tensor product with qubit 0 least significant (rightmost factor)."""
    out = np.eye(1)
    for q in reversed(range(n)):
        out = np.kron(out, ops.get(q, np.eye(2)))
    return out


def cnot_dense(c, t, n):
    N = 1 << n
    U = np.zeros((N, N))
    for x in range(N):
        U[x ^ (((x >> c) & 1) << t), x] = 1
    return U


def test_two_state_fragments():
    m = VibronicModel.from_terms(2, [1.0], {})
    f0, f1 = fragments(m)
    assert f0.m == 0 and f0.is_diagonal and f0.clifford is None
    assert f0.pairs == ((0, 0), (1, 1))
    assert f1.pairs == ((0, 1),)


def test_four_state_fragment_three_pairs():
    m = VibronicModel.from_terms(4, [1.0], {})
    assert fragments(m)[3].pairs == ((0, 3), (1, 2))


def test_eight_state_fragment_five_pairs():
    m = VibronicModel.from_terms(8, [1.0], {})
    assert set(fragments(m)[5].pairs) == {(0, 5), (1, 4), (2, 7), (3, 6)}


@pytest.mark.parametrize("n", [1, 2, 3])
def test_pairs_partition_states(n):
    m = VibronicModel.from_terms(1 << n, [1.0], {})
    for f in fragments(m)[1:]:
        flat = sorted(x for pair in f.pairs for x in pair)
        assert flat == list(range(1 << n))


def test_fragment_of_is_xor():
    assert fragment_of(2, 7) == 5


def test_recipe_m1():
    assert diagonalizer_for(1, 2) == DiagonalizerRecipe(0, (), 0)


def test_recipe_m3():
    r = diagonalizer_for(3, 2)
    assert r.cnots == ((0, 1),) and r.hadamard_on == 0
    assert r.gates() == [("CNOT", 0, 1), ("H", 0)]


def test_recipe_m6_dense():
    r = diagonalizer_for(6, 3)
    assert r.control_qubit == 1 and r.cnots == ((1, 2),) and r.hadamard_on == 1
    # U = H_1 CNOT_{1->2}; fragment-6 electronic pattern becomes diagonal
    U = kron_qubits({1: H1}, 3) @ cnot_dense(1, 2, 3)
    assert np.allclose(clifford_matrix(r, 3), U, atol=1e-15)
    X6 = np.zeros((8, 8))
    for j in range(8):
        X6[j, j ^ 6] = 1
    D = U @ X6 @ U.T
    assert np.allclose(D, np.diag(np.diag(D)), atol=1e-15)


@pytest.mark.parametrize("m,n", [(0, 2), (4, 2), (-1, 2)])
def test_recipe_rejects_bad_m(m, n):
    with pytest.raises(ValueError):
        diagonalizer_for(m, n)


def test_recipe_inverse_is_reverse():
    r = diagonalizer_for(7, 3)
    U = clifford_matrix(r, 3)
    assert np.allclose(U @ U.T, np.eye(8), atol=1e-14)
    inv = np.eye(8)
    for gate in r.inverse_gates():
        G = kron_qubits({gate[1]: H1}, 3) if gate[0] == "H" else cnot_dense(gate[1], gate[2], 3)
        inv = G @ inv
    assert np.allclose(inv @ U, np.eye(8), atol=1e-14)


def test_fragment_zero_block_diagonal_exactly(rng, k3):
    m = random_model(rng, 4, 1, 2)
    assert verify_block_diagonal(fragments(m)[0], m, k3) == 0.0


def test_random_lvc_fragments_block_diagonal(rng, k3):
    m = random_model(rng, 4, 2, 1)
    for f in fragments(m):
        assert verify_block_diagonal(f, m, k3) < 1e-12


def test_wrong_recipe_detected(k3):
    m = VibronicModel.from_terms(4, [1.0], {(0, 3, mi()): 0.4, (1, 2, mi((0, 1))): 0.3})
    f3 = fragments(m)[3]
    # Hadamard on qubit 1 without the CNOT does not turn X(x)X into a diagonal
    wrong = DiagonalizerRecipe(1, (), 1)
    assert verify_block_diagonal(f3, m, k3, recipe=wrong) > 0.1


def test_conjugated_signs_follow_control_bit(k3):
    m = VibronicModel.from_terms(4, [1.0], {(0, 3, mi()): 0.4, (1, 2, mi()): -0.3})
    C = conjugate_fragment(fragments(m)[3], m, k3, include_v0=False).toarray()
    diag = np.diag(C).reshape(4, k3.K)[:, 0]
    # U maps |0>,|3> onto the 0/1 control pair and |1>,|2> onto 2/3
    assert np.allclose(np.sort(diag), np.sort([0.4, -0.4, 0.3, -0.3]), atol=1e-14)
    for jp in range(4):
        sign = -1 if jp & 1 else 1
        assert np.sign(diag[jp]) * sign * np.sign([0.4, 0.4, -0.3, -0.3][jp]) > 0


@given(st.integers(0, 2**32 - 1), st.sampled_from([2, 4, 8]), st.integers(1, 2), st.integers(0, 3))
def test_fragment_sum_reconstructs_potential(seed, n_states, n_modes, degree):
    m = random_model(np.random.default_rng(seed), n_states, n_modes, degree)
    g = GridConfig(2)
    V = build_potential_matrix(m, g)
    total = sum(fragment_matrix(f, m, g) for f in fragments(m))
    assert abs(total - V).max() < 1e-13


@given(st.integers(0, 2**32 - 1), st.sampled_from([2, 4, 8]))
def test_conjugated_fragments_commute_with_electronic_z(seed, n_states):
    m = random_model(np.random.default_rng(seed), n_states, 1, 2)
    g = GridConfig(2)
    n = m.n_qubits
    for f in fragments(m):
        C = conjugate_fragment(f, m, g).toarray()
        for q in range(n):
            Z = np.kron(kron_qubits({q: np.diag([1.0, -1.0])}, n), np.eye(g.K))
            assert np.max(np.abs(C @ Z - Z @ C)) < 1e-12
