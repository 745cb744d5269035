"""Multipartite Hilbert-space foundation: basis indexing, state vectors,
local-operator embedding, inner products and expectation values.

Basis ordering convention (used everywhere in this package)
-----------------------------------------------------------
Subsystems are numbered 1..N and the dimension tuple is ``(d1, ..., dN)``.
A basis ket is written, as in the usual ket notation, with subsystem N
leftmost: ``|sN ... s2 s1>``.  Its position in the amplitude vector is the
mixed-radix integer with subsystem 1 varying fastest::

    index = s1 + d1*(s2 + d2*(s3 + ...))

So for three qubits ``|s3 s2 s1>`` sits at ``s1 + 2*s2 + 4*s3``; e.g.
``|101>`` is index 5.  Digit sequences passed to :func:`basis_index` and
:func:`basis_ket` follow the ket print order ``(sN, ..., s1)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce
from typing import Iterable, Sequence, Union

import numpy as np

#: absolute tolerance for normalization and Hermiticity checks (double
#: precision leaves ample headroom at the desk scales this package targets)
SCALAR_TOL = 1e-12

#: looser tolerance used when validating *inputs* that went through an
#: integrator renormalization step
NORM_INPUT_TOL = 1e-9


class DimensionMismatchError(ValueError):
    """Operands built over incompatible subsystem dimensions."""


class DigitRangeError(ValueError):
    """A basis digit lies outside the range of its subsystem."""


@dataclass(frozen=True)
class SubsystemDims:
    """Ordered subsystem dimensions ``(d1, ..., dN)``."""

    dims: tuple

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        object.__setattr__(self, "dims", dims)
        if len(dims) < 2:
            raise ValueError("need at least two subsystems, got %d" % len(dims))
        for n, d in enumerate(dims, start=1):
            if d < 2:
                raise ValueError("subsystem %d has dimension %d, must be >= 2" % (n, d))

    @property
    def n_subsystems(self) -> int:
        return len(self.dims)

    @property
    def total_dim(self) -> int:
        return int(np.prod(self.dims))

    def dim(self, n: int) -> int:
        """Dimension of subsystem ``n`` (1-based)."""
        self._check_subsystem(n)
        return self.dims[n - 1]

    def stride(self, n: int) -> int:
        """Index stride of subsystem ``n``: the product d1*...*d_{n-1}."""
        self._check_subsystem(n)
        return int(np.prod(self.dims[: n - 1], dtype=np.int64))

    def _check_subsystem(self, n: int):
        if not 1 <= n <= len(self.dims):
            raise DimensionMismatchError(
                "subsystem index %r outside 1..%d" % (n, len(self.dims))
            )

    def __len__(self):
        return len(self.dims)

    def __iter__(self):
        return iter(self.dims)


DimsLike = Union[SubsystemDims, Sequence[int]]


def as_dims(dims: DimsLike) -> SubsystemDims:
    if isinstance(dims, SubsystemDims):
        return dims
    return SubsystemDims(tuple(dims))


@dataclass(frozen=True)
class StateVector:
    """Complex amplitude vector over the mixed-radix multipartite basis.

    ``normalized`` is a promise: when True the squared amplitudes sum to
    one within ``SCALAR_TOL``.  Amplitude arrays are frozen after
    construction so instances can be shared freely between tasks.
    """

    amplitudes: np.ndarray
    dims: SubsystemDims
    normalized: bool = False

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=np.complex128).reshape(-1)
        dims = as_dims(self.dims)
        if amps.shape[0] != dims.total_dim:
            raise DimensionMismatchError(
                "amplitude vector has length %d, dims %r give %d"
                % (amps.shape[0], dims.dims, dims.total_dim)
            )
        if self.normalized:
            nrm2 = float(np.vdot(amps, amps).real)
            if abs(nrm2 - 1.0) > SCALAR_TOL:
                raise ValueError(
                    "state flagged normalized but |<psi|psi>-1| = %.3e" % abs(nrm2 - 1.0)
                )
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "dims", dims)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))


@dataclass(frozen=True)
class LocalOperator:
    """A d_n x d_n operator acting on a single subsystem (1-based index)."""

    subsystem: int
    matrix: np.ndarray
    observable: bool = False

    def __post_init__(self):
        mat = np.asarray(self.matrix, dtype=np.complex128)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise DimensionMismatchError("local operator matrix must be square")
        if self.observable and np.abs(mat - mat.conj().T).max() > SCALAR_TOL:
            raise ValueError("operator flagged observable is not Hermitian")
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)


@dataclass(frozen=True)
class DenseOperator:
    """A full D x D operator over the whole system."""

    matrix: np.ndarray
    dims: SubsystemDims

    def __post_init__(self):
        mat = np.asarray(self.matrix, dtype=np.complex128)
        dims = as_dims(self.dims)
        if mat.shape != (dims.total_dim, dims.total_dim):
            raise DimensionMismatchError(
                "dense operator shape %r does not match total dimension %d"
                % (mat.shape, dims.total_dim)
            )
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)

    def is_hermitian(self, tol: float = SCALAR_TOL) -> bool:
        return bool(np.abs(self.matrix - self.matrix.conj().T).max() <= tol)


def basis_index(digits: Sequence[int], dims: DimsLike) -> int:
    """Linear index of the ket ``|digits>`` (digits in ket order sN..s1)."""
    dims = as_dims(dims)
    if len(digits) != len(dims):
        raise DimensionMismatchError(
            "got %d digits for %d subsystems" % (len(digits), len(dims))
        )
    index = 0
    # digits[0] belongs to subsystem N; accumulate from the slow end down
    for pos, digit in enumerate(digits):
        n = len(dims) - pos  # subsystem number
        d = dims.dims[n - 1]
        digit = int(digit)
        if not 0 <= digit < d:
            raise DigitRangeError(
                "digit %d for subsystem %d outside 0..%d" % (digit, n, d - 1)
            )
        index = index * d + digit
    return index


def index_digits(index: int, dims: DimsLike) -> tuple:
    """Inverse of :func:`basis_index`; returns digits in ket order."""
    dims = as_dims(dims)
    if not 0 <= index < dims.total_dim:
        raise DigitRangeError("index %d outside 0..%d" % (index, dims.total_dim - 1))
    digits = []
    rem = int(index)
    for d in dims.dims:  # subsystem 1 first (fastest)
        digits.append(rem % d)
        rem //= d
    return tuple(reversed(digits))


def basis_ket(digits: Sequence[int], dims: DimsLike) -> StateVector:
    """Unit vector for the basis ket ``|digits>``."""
    dims = as_dims(dims)
    amps = np.zeros(dims.total_dim, dtype=np.complex128)
    amps[basis_index(digits, dims)] = 1.0
    return StateVector(amps, dims, normalized=True)


def embed(op: LocalOperator, dims: DimsLike) -> DenseOperator:
    """Tensor ``op`` with identities on all other subsystems.

    Built as an explicit Kronecker chain; the matrix-free
    :func:`apply_local` is the fast path, this is its dense counterpart
    and test oracle.
    """
    dims = as_dims(dims)
    dims._check_subsystem(op.subsystem)
    d = dims.dim(op.subsystem)
    if op.matrix.shape != (d, d):
        raise DimensionMismatchError(
            "operator is %r but subsystem %d has dimension %d"
            % (op.matrix.shape, op.subsystem, d)
        )
    # kron runs its rightmost factor fastest, so list subsystems N..1
    factors = []
    for n in range(len(dims), 0, -1):
        factors.append(op.matrix if n == op.subsystem else np.eye(dims.dim(n)))
    matrix = reduce(np.kron, factors)
    return DenseOperator(matrix, dims)


def _apply_local_array(
    amps: np.ndarray, matrix: np.ndarray, subsystem: int, dims: SubsystemDims
) -> np.ndarray:
    """Matrix-free local application on a raw amplitude array; O(D * d_n)."""
    d = dims.dim(subsystem)
    low = dims.stride(subsystem)
    high = dims.total_dim // (low * d)
    reshaped = amps.reshape(high, d, low)
    return np.einsum("ab,hbl->hal", matrix, reshaped).reshape(-1)


def apply_local(psi: StateVector, op: LocalOperator) -> StateVector:
    """Apply a local operator without forming its dense embedding."""
    dims = psi.dims
    dims._check_subsystem(op.subsystem)
    d = dims.dim(op.subsystem)
    if op.matrix.shape != (d, d):
        raise DimensionMismatchError(
            "operator is %r but subsystem %d has dimension %d"
            % (op.matrix.shape, op.subsystem, d)
        )
    out = _apply_local_array(psi.amplitudes, op.matrix, op.subsystem, dims)
    return StateVector(out, dims, normalized=False)


def inner(phi: StateVector, psi: StateVector) -> complex:
    """The inner product <phi|psi> (conjugate-linear in the first slot)."""
    _check_same_dims(phi, psi)
    return complex(np.vdot(phi.amplitudes, psi.amplitudes))


def expectation(
    psi: StateVector, op: Union[LocalOperator, DenseOperator]
) -> complex:
    """Expectation value <psi|op|psi> for a normalized state."""
    _require_normalized(psi)
    if isinstance(op, LocalOperator):
        applied = _apply_local_array(psi.amplitudes, op.matrix, op.subsystem, psi.dims)
    else:
        if op.dims.dims != psi.dims.dims:
            raise DimensionMismatchError("operator dims %r != state dims %r" % (op.dims.dims, psi.dims.dims))
        applied = op.matrix @ psi.amplitudes
    return complex(np.vdot(psi.amplitudes, applied))


def fidelity(phi: StateVector, psi: StateVector) -> float:
    """|<phi|psi>|^2; insensitive to the global phase of either state."""
    _check_same_dims(phi, psi)
    _require_normalized(phi)
    _require_normalized(psi)
    overlap = np.vdot(phi.amplitudes, psi.amplitudes)
    return float(min(abs(overlap) ** 2, 1.0))


def _check_same_dims(phi: StateVector, psi: StateVector):
    if phi.dims.dims != psi.dims.dims:
        raise DimensionMismatchError(
            "states live on different dims: %r vs %r" % (phi.dims.dims, psi.dims.dims)
        )
    if phi.amplitudes.shape != psi.amplitudes.shape:
        raise DimensionMismatchError("amplitude lengths differ")


def _require_normalized(psi: StateVector, tol: float = NORM_INPUT_TOL):
    nrm2 = float(np.vdot(psi.amplitudes, psi.amplitudes).real)
    if abs(nrm2 - 1.0) > tol:
        raise ValueError("state must be normalized; |<psi|psi>-1| = %.3e" % abs(nrm2 - 1.0))
