"""Deterministic random sampling for property checks.

Haar-distributed pure states are drawn as vectors of independent standard
complex Gaussians, normalized; Haar-distributed unitaries come from the
QR decomposition of a complex Gaussian matrix with the phases of R's
diagonal absorbed.  Everything is driven by an explicit
``numpy.random.Generator`` so ensembles are reproducible from a recorded
seed.
"""

from __future__ import annotations

import numpy as np

from .hilbert import StateVector, as_dims


def rng_for(seed: int) -> np.random.Generator:
    return np.random.default_rng(seed)


def haar_state(rng: np.random.Generator, dims) -> StateVector:
    """A Haar-random pure state of the full system."""
    dims = as_dims(dims)
    z = rng.standard_normal(dims.total_dim) + 1j * rng.standard_normal(dims.total_dim)
    return StateVector(z / np.linalg.norm(z), dims, normalized=True)


def product_state(rng: np.random.Generator, dims) -> StateVector:
    """A tensor product of independent Haar-random subsystem states."""
    dims = as_dims(dims)
    amps = np.array([1.0 + 0.0j])
    # kron order: subsystem N first so subsystem 1 varies fastest
    for d in reversed(dims.dims):
        z = rng.standard_normal(d) + 1j * rng.standard_normal(d)
        amps = np.kron(amps, z / np.linalg.norm(z))
    return StateVector(amps, dims, normalized=True)


def haar_unitary(rng: np.random.Generator, d: int) -> np.ndarray:
    """A d x d Haar-random unitary matrix."""
    z = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    q, r = np.linalg.qr(z)
    phases = np.diag(r).copy()
    phases /= np.abs(phases)
    return q * phases
