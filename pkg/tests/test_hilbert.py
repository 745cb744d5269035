import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from entflow.hilbert import (
    DigitRangeError,
    DimensionMismatchError,
    LocalOperator,
    StateVector,
    apply_local,
    as_dims,
    basis_index,
    basis_ket,
    embed,
    expectation,
    fidelity,
    index_digits,
    inner,
)
from entflow.gellmann import generate
from entflow.sampling import haar_state
from entflow.statelib import ghz


def test_basis_index_corners(qubits):
    assert basis_index((0, 0, 0), qubits) == 0
    assert basis_index((1, 1, 1), qubits) == 7
    # |s3 s2 s1> = |101> -> 1 + 4 = 5
    assert basis_index((1, 0, 1), qubits) == 5


def test_basis_index_enumeration_oracle(qubits):
    # brute-force bijection over all digit tuples against the radix formula
    seen = set()
    for s3, s2, s1 in itertools.product(range(2), repeat=3):
        idx = basis_index((s3, s2, s1), qubits)
        assert idx == s1 + 2 * s2 + 4 * s3
        seen.add(idx)
    assert seen == set(range(8))


def test_basis_index_rejects_bad_digit(qubits):
    with pytest.raises(DigitRangeError, match="subsystem 2"):
        basis_index((0, 2, 0), qubits)
    with pytest.raises(DimensionMismatchError):
        basis_index((0, 0), qubits)


@given(st.lists(st.integers(min_value=2, max_value=5), min_size=2, max_size=4), st.data())
@settings(max_examples=200, deadline=None)
def test_basis_index_bijection_random(dims_list, data):
    dims = as_dims(tuple(dims_list))
    digits = tuple(
        data.draw(st.integers(min_value=0, max_value=dims.dim(n) - 1))
        for n in range(len(dims), 0, -1)
    )
    idx = basis_index(digits, dims)
    assert 0 <= idx < dims.total_dim
    assert index_digits(idx, dims) == digits


def test_basis_ket_positions(qubits):
    assert basis_ket((0, 0, 0), qubits).amplitudes[0] == 1.0
    assert basis_ket((1, 1, 1), qubits).amplitudes[7] == 1.0
    ket = basis_ket((0, 1, 1), qubits)
    assert ket.amplitudes[3] == 1.0
    # |0><1| style projector diag(0,1) on subsystem 2 sees s2 = 1
    proj = LocalOperator(2, np.diag([0.0, 1.0]), observable=True)
    assert expectation(ket, proj) == pytest.approx(1.0, abs=1e-15)


def test_basis_ket_eigenvalue_convention(qubits):
    # (1 - l3)/2 = diag(0, 1) reads off the digit of each subsystem
    l3 = generate(2)[2]
    reader = (np.eye(2) - l3) / 2
    for digits in itertools.product(range(2), repeat=3):
        ket = basis_ket(digits, qubits)
        for n in range(1, 4):
            want = digits[3 - n]  # ket order: subsystem n sits 3-n from the left
            got = expectation(ket, LocalOperator(n, reader, observable=True))
            assert got == pytest.approx(want, abs=1e-15)


def test_embed_identity_and_l3_patterns(qubits):
    eye = embed(LocalOperator(2, np.eye(2)), qubits)
    assert np.array_equal(eye.matrix, np.eye(8))
    l3 = generate(2)[2]
    # oracle: apply the embedding to every basis ket and read the eigenvalue
    for subsystem, pattern in (
        (1, [1, -1, 1, -1, 1, -1, 1, -1]),
        (3, [1, 1, 1, 1, -1, -1, -1, -1]),
    ):
        dense = embed(LocalOperator(subsystem, l3), qubits).matrix
        for idx in range(8):
            digits = tuple(int(b) for b in np.binary_repr(idx, 3))
            ket = basis_ket(digits, qubits).amplitudes
            applied = dense @ ket
            assert np.allclose(applied, pattern[idx] * ket)
        assert np.allclose(np.diag(dense), pattern)


def test_embed_dimension_mismatch(qubits):
    with pytest.raises(DimensionMismatchError):
        embed(LocalOperator(1, np.eye(3)), qubits)


def test_apply_local_examples(qubits):
    psi = basis_ket((0, 0, 0), qubits)
    ident = apply_local(psi, LocalOperator(2, np.eye(2)))
    assert np.array_equal(ident.amplitudes, psi.amplitudes)
    l1, _, l3 = generate(2)
    assert np.allclose(apply_local(psi, LocalOperator(1, l3)).amplitudes, psi.amplitudes)
    flipped = apply_local(psi, LocalOperator(2, l1))
    assert np.allclose(flipped.amplitudes, basis_ket((0, 1, 0), qubits).amplitudes)


def test_apply_local_matches_embed(rng):
    for _ in range(100):
        n_subs = int(rng.integers(2, 4))
        dims = as_dims(tuple(int(rng.integers(2, 4)) for _ in range(n_subs)))
        psi = haar_state(rng, dims)
        n = int(rng.integers(1, len(dims) + 1))
        d = dims.dim(n)
        op = LocalOperator(n, rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d)))
        fast = apply_local(psi, op).amplitudes
        dense = embed(op, dims).matrix @ psi.amplitudes
        assert np.linalg.norm(fast - dense) <= 1e-13 * max(np.linalg.norm(dense), 1.0)
        # norms computed matrix-free vs densely agree too
        assert abs(np.linalg.norm(fast) - np.linalg.norm(dense)) <= 1e-13


def test_inner_and_expectation(qubits, rng):
    psi = haar_state(rng, qubits)
    assert inner(psi, psi) == pytest.approx(1.0, abs=1e-12)
    l3 = generate(2)[2]
    zero = basis_ket((0, 0, 0), qubits)
    for n in (1, 2, 3):
        assert expectation(zero, LocalOperator(n, l3)) == pytest.approx(1.0, abs=1e-15)
    # GHZ: amplitudes occupy opposite l3 eigenspaces, so the mean vanishes
    g = ghz()
    direct = sum(abs(a) ** 2 * s for a, s in zip(g.amplitudes, [1, -1, 1, -1, 1, -1, 1, -1]))
    assert direct == pytest.approx(0.0, abs=1e-15)
    assert expectation(g, LocalOperator(1, l3)) == pytest.approx(direct, abs=1e-12)


def test_hermitian_expectation_real(rng, qubits):
    for _ in range(100):
        psi = haar_state(rng, qubits)
        z = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        op = LocalOperator(int(rng.integers(1, 4)), z + z.conj().T, observable=True)
        assert abs(expectation(psi, op).imag) <= 1e-12


def test_fidelity(qubits, rng):
    psi = haar_state(rng, qubits)
    assert fidelity(psi, psi) == pytest.approx(1.0, abs=1e-12)
    phased = StateVector(np.exp(0.7j) * psi.amplitudes, qubits, normalized=True)
    assert fidelity(psi, phased) == pytest.approx(1.0, abs=1e-12)
    # |<000|GHZ>|^2 = (1/sqrt(2))^2
    assert fidelity(basis_ket((0, 0, 0), qubits), ghz()) == pytest.approx(0.5, abs=1e-15)


def test_fidelity_requires_matching_dims(qubits):
    other = basis_ket((0, 0), (2, 4))
    with pytest.raises(DimensionMismatchError):
        fidelity(basis_ket((0, 0, 0), qubits), other)


def test_state_vector_validation(qubits):
    with pytest.raises(DimensionMismatchError):
        StateVector(np.zeros(7), qubits)
    with pytest.raises(ValueError, match="normalized"):
        StateVector(np.ones(8), qubits, normalized=True)
    frozen = basis_ket((0, 0, 0), qubits)
    with pytest.raises(ValueError):
        frozen.amplitudes[0] = 2.0
