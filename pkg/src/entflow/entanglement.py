"""Pairwise entanglement machinery: covariance tensors, the measure tau,
and the nonlinear damping generator applied to a state.

For a chosen ordered subsystem pair (n', n'') with generator bases
``{l_a}`` on n' and ``{m_b}`` on n'', the covariance tensor of a
normalized state is::

    c[a, b] = <l_a m_b> - <l_a><m_b>

(real, because operators on distinct subsystems commute).  The measure is
``tau = eta * sum_ab c[a,b]^2`` and the generator acts as::

    Q|psi> = eta * sum_ab c[a,b] * (m_b l_a |psi> - <m_b> l_a |psi>)

which is the rank-expanded form of the covariance-operator sum; its
expectation equals tau.  ``apply_Q`` evaluates this matrix-free in
O((K1 + K2) * D * d + K1 * K2 * D); ``dense_Q`` builds the literal dense
operator and exists as the slow cross-checking oracle for D <= 64.

The ordered pair matters: the generator is not symmetric under swapping
n' and n'' (the expectation-weighted half changes sides), even though tau
itself is.  Nothing here symmetrizes; callers choose the order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import gellmann
from .hilbert import (
    DenseOperator,
    DimensionMismatchError,
    LocalOperator,
    StateVector,
    SubsystemDims,
    _apply_local_array,
    _require_normalized,
    as_dims,
    embed,
)

#: imaginary parts above this in a covariance tensor indicate a bug, not noise
COVARIANCE_IMAG_TOL = 1e-10

#: default separability / basin threshold on Bloch-vector length
DEFAULT_CLASSIFY_TOL = 1e-3


def default_eta(dims, first: int, second: int) -> float:
    """Pair coefficient: 1/3 normalizes qubit pairs to tau in [0, 1]."""
    dims = as_dims(dims)
    if dims.dim(first) == 2 and dims.dim(second) == 2:
        return 1.0 / 3.0
    return 1.0


@dataclass(frozen=True)
class PairSelector:
    """An ordered subsystem pair (1-based) with its positive coefficient."""

    first: int
    second: int
    eta: float

    def __post_init__(self):
        if self.first == self.second:
            raise ValueError("pair members must differ, got (%d, %d)" % (self.first, self.second))
        if self.first < 1 or self.second < 1:
            raise ValueError("subsystem indices are 1-based")
        if not self.eta > 0:
            raise ValueError("eta must be positive, got %r" % (self.eta,))

    @classmethod
    def for_dims(cls, dims, first: int, second: int, eta: Optional[float] = None) -> "PairSelector":
        dims = as_dims(dims)
        dims._check_subsystem(first)
        dims._check_subsystem(second)
        if eta is None:
            eta = default_eta(dims, first, second)
        return cls(first, second, eta)

    def swapped(self) -> "PairSelector":
        return PairSelector(self.second, self.first, self.eta)

    @property
    def key(self) -> tuple:
        """Unordered pair key (min, max)."""
        return (min(self.first, self.second), max(self.first, self.second))


@dataclass(frozen=True)
class CovarianceTensor:
    """Real covariance matrix over the two generator bases of a pair."""

    pair: PairSelector
    values: np.ndarray  # shape (d1^2-1, d2^2-1), float64
    max_imag: float  # largest raw imaginary part, diagnostic

    def __post_init__(self):
        vals = np.ascontiguousarray(self.values, dtype=np.float64)
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def tau(self) -> float:
        return float(self.pair.eta * np.sum(self.values * self.values))


@dataclass(frozen=True)
class EntanglementReport:
    """Snapshot of every pairwise tau and every subsystem Bloch vector."""

    time: float
    taus: dict  # {(n_min, n_max): tau}
    bloch_vectors: tuple  # one real array per subsystem, in order 1..N

    @property
    def bloch_lengths(self) -> tuple:
        return tuple(float(np.linalg.norm(v)) for v in self.bloch_vectors)

    def tau_of(self, first: int, second: int) -> float:
        return self.taus[(min(first, second), max(first, second))]


def _pair_bases(psi: StateVector, pair: PairSelector, bases):
    dims = psi.dims
    dims._check_subsystem(pair.first)
    dims._check_subsystem(pair.second)
    if bases is None:
        bases = gellmann.bases_for(dims)
    b1 = bases[pair.first - 1]
    b2 = bases[pair.second - 1]
    if b1.d != dims.dim(pair.first) or b2.d != dims.dim(pair.second):
        raise DimensionMismatchError("generator bases do not match subsystem dimensions")
    return b1, b2


def _stacked_apply(amps: np.ndarray, basis, subsystem: int, dims: SubsystemDims) -> np.ndarray:
    """Apply every generator of one subsystem; returns shape (K, D)."""
    d = dims.dim(subsystem)
    low = dims.stride(subsystem)
    high = dims.total_dim // (low * d)
    reshaped = amps.reshape(high, d, low)
    out = np.einsum("kab,hbl->khal", basis.matrices, reshaped)
    return out.reshape(basis.count, dims.total_dim)


def _covariance_parts(psi: StateVector, pair: PairSelector, bases):
    """Shared core: stacked applications, first/second moments, covariance."""
    b1, b2 = _pair_bases(psi, pair, bases)
    amps = psi.amplitudes
    A = _stacked_apply(amps, b1, pair.first, psi.dims)
    B = _stacked_apply(amps, b2, pair.second, psi.dims)
    conj = amps.conj()
    e1c = A @ conj
    e2c = B @ conj
    # <l_a m_b> = <m_b psi | l_a psi> since the generators are Hermitian
    Ec = A @ B.conj().T
    max_imag = float(
        max(np.abs(e1c.imag).max(), np.abs(e2c.imag).max(), np.abs(Ec.imag).max())
    )
    cov = Ec.real - np.outer(e1c.real, e2c.real)
    return A, B, e1c.real, e2c.real, cov, max_imag


def covariance_tensor(psi: StateVector, pair: PairSelector, bases=None) -> CovarianceTensor:
    """Covariance of all generator pairs; entries <l_a m_b> - <l_a><m_b>."""
    _require_normalized(psi)
    _, _, _, _, cov, max_imag = _covariance_parts(psi, pair, bases)
    if max_imag > COVARIANCE_IMAG_TOL:
        raise ArithmeticError(
            "covariance entries acquired imaginary part %.3e; "
            "generator bases are corrupt" % max_imag
        )
    return CovarianceTensor(pair, cov, max_imag)


def tau(psi: StateVector, pair: PairSelector, bases=None) -> float:
    """The pairwise measure eta * ||covariance||_F^2; zero iff the pair is
    uncorrelated under every product of local generators."""
    return covariance_tensor(psi, pair, bases).tau()


def apply_Q(psi: StateVector, pair: PairSelector, bases=None) -> np.ndarray:
    """Matrix-free Q|psi>; returns an unnormalized amplitude array."""
    _require_normalized(psi)
    A, _, _, e2, cov, max_imag = _covariance_parts(psi, pair, bases)
    if max_imag > COVARIANCE_IMAG_TOL:
        raise ArithmeticError("covariance entries acquired imaginary part %.3e" % max_imag)
    b1, b2 = _pair_bases(psi, pair, bases)
    dims = psi.dims
    # sum_ab c[a,b] m_b l_a psi  ==  sum_b m_b (sum_a c[a,b] A_a)
    u = cov.T @ A  # (K2, D)
    d2 = dims.dim(pair.second)
    low = dims.stride(pair.second)
    high = dims.total_dim // (low * d2)
    v = np.einsum(
        "kab,khbl->hal", b2.matrices, u.reshape(b2.count, high, d2, low)
    ).reshape(-1)
    w = (cov @ e2) @ A
    return pair.eta * (v - w)


def dense_Q(psi: StateVector, pair: PairSelector, bases=None) -> DenseOperator:
    """Literal dense transcription of the generator; test oracle for D <= 64.

    Q = eta * sum_ab C_ab |psi><psi| C_ab  with
    C_ab = m_b l_a |psi><psi| - l_a |psi><psi| m_b  as dense matrices.
    """
    _require_normalized(psi)
    b1, b2 = _pair_bases(psi, pair, bases)
    dims = psi.dims
    amps = psi.amplitudes
    proj = np.outer(amps, amps.conj())
    total = np.zeros((dims.total_dim, dims.total_dim), dtype=np.complex128)
    emb1 = [embed(LocalOperator(pair.first, m), dims).matrix for m in b1]
    emb2 = [embed(LocalOperator(pair.second, m), dims).matrix for m in b2]
    for L in emb1:
        LP = L @ proj
        for M in emb2:
            C = M @ LP - LP @ M
            total += C @ proj @ C
    return DenseOperator(pair.eta * total, dims)


def bloch_vector(psi: StateVector, n: int, bases=None) -> np.ndarray:
    """Generator expectation vector (<l_1>, ..., <l_{d^2-1}>) of subsystem n."""
    _require_normalized(psi)
    dims = psi.dims
    dims._check_subsystem(n)
    basis = gellmann.generate(dims.dim(n)) if bases is None else bases[n - 1]
    if basis.d != dims.dim(n):
        raise DimensionMismatchError("generator basis does not match subsystem dimension")
    stacked = _stacked_apply(psi.amplitudes, basis, n, dims)
    return np.asarray((stacked @ psi.amplitudes.conj()).real, dtype=np.float64)


def max_bloch_length(d: int) -> float:
    """Bloch-vector length of a pure (fully separable) subsystem state.

    Equals 1 for qubits; sqrt(2*(d-1)/d) in general, from purity
    tr(rho^2) = 1/d + |k|^2/2 = 1.
    """
    return float(np.sqrt(2.0 * (d - 1) / d))


def report(psi: StateVector, time: float = 0.0, bases=None) -> EntanglementReport:
    """Full snapshot: tau for every unordered pair (with its default eta)
    plus every subsystem Bloch vector."""
    _require_normalized(psi)
    dims = psi.dims
    if bases is None:
        bases = gellmann.bases_for(dims)
    taus = {}
    for first in range(1, len(dims) + 1):
        for second in range(first + 1, len(dims) + 1):
            pair = PairSelector.for_dims(dims, first, second)
            taus[(first, second)] = tau(psi, pair, bases)
    blochs = tuple(bloch_vector(psi, n, bases) for n in range(1, len(dims) + 1))
    return EntanglementReport(time=float(time), taus=taus, bloch_vectors=blochs)


def classify_separability(
    report: EntanglementReport, tol: float = DEFAULT_CLASSIFY_TOL, dims=None
) -> str:
    """Which subsystems are fully separable: 'Vn' for exactly one n, 'V'
    for all of them, 'none' otherwise.

    The criterion is Bloch length at its pure-state maximum (length 1 for
    qubits) within ``tol``; non-qubit lengths are compared against
    :func:`max_bloch_length` of their dimension.
    """
    lengths = report.bloch_lengths
    if dims is None:
        caps = [1.0] * len(lengths)  # qubit convention
    else:
        caps = [max_bloch_length(d) for d in as_dims(dims)]
    separable = [k >= cap * (1.0 - tol) for k, cap in zip(lengths, caps)]
    if all(separable):
        return "V"
    if sum(separable) == 1:
        return "V%d" % (separable.index(True) + 1)
    return "none"
