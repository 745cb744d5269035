import numpy as np
import pytest

from entflow.gellmann import generate

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)


def test_d2_is_the_pauli_triple():
    basis = generate(2)
    assert basis.count == 3
    assert np.array_equal(basis[0], PAULI_X)
    assert np.array_equal(basis[1], PAULI_Y)
    assert np.array_equal(basis[2], PAULI_Z)


def test_every_generator_traceless():
    for d in (2, 3, 4, 5, 7):
        for m in generate(d):
            assert abs(np.trace(m)) <= 1e-13


def test_d3_orthogonality_gram_bruteforce():
    basis = generate(3)
    assert basis.count == 8
    # brute-force Gram matrix over all pairs
    gram = np.array([[np.trace(a @ b) for b in basis] for a in basis])
    assert np.abs(gram - 2.0 * np.eye(8)).max() <= 1e-12


@pytest.mark.parametrize("d", [2, 3, 4, 5])
def test_basis_suite(d):
    basis = generate(d)
    assert basis.count == d * d - 1
    for m in basis:
        assert np.abs(m - m.conj().T).max() <= 1e-12
        assert abs(np.trace(m)) <= 1e-12
    gram = np.einsum("aij,bji->ab", basis.matrices, basis.matrices)
    assert np.abs(gram - 2.0 * np.eye(basis.count)).max() <= 1e-12


def test_completeness_relation_d2():
    basis = generate(2).matrices
    d = 2
    lhs = np.einsum("aij,akl->ijkl", basis, basis)
    eye = np.eye(d)
    rhs = 2.0 * np.einsum("il,jk->ijkl", eye, eye) - (2.0 / d) * np.einsum(
        "ij,kl->ijkl", eye, eye
    )
    assert np.abs(lhs - rhs).max() <= 1e-12


def test_rejects_small_d():
    with pytest.raises(ValueError):
        generate(1)
