"""Generalized Gell-Mann generator bases of SU(d).

Enumeration order, which the covariance tensors and Bloch vectors in the
rest of the package rely on:

1. symmetric off-diagonal generators  E_jk + E_kj            (pairs j<k, lexicographic)
2. antisymmetric off-diagonal ones    -i E_jk + i E_kj       (same pair order)
3. the d-1 diagonal generators        sqrt(2/(l(l+1))) * diag(1,..,1,-l,0,..)

For d = 2 this is exactly the Pauli triple (sigma_x, sigma_y, sigma_z)
with sigma_z = diag(1, -1), so the qubit basis kets |0>, |1> are the
+1/-1 eigenvectors of the third generator.  All generators are Hermitian,
traceless and satisfy trace(l_a l_b) = 2 delta_ab.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np


@dataclass(frozen=True)
class GellMannBasis:
    """The d*d-1 generators for one subsystem, in the package order."""

    d: int
    matrices: np.ndarray  # shape (d*d-1, d, d), complex

    def __post_init__(self):
        mats = np.ascontiguousarray(self.matrices, dtype=np.complex128)
        mats.setflags(write=False)
        object.__setattr__(self, "matrices", mats)

    @property
    def count(self) -> int:
        return self.d * self.d - 1

    def __iter__(self):
        return iter(self.matrices)

    def __getitem__(self, a: int) -> np.ndarray:
        return self.matrices[a]


@lru_cache(maxsize=None)
def generate(d: int) -> GellMannBasis:
    """Generate the generalized Gell-Mann basis for dimension ``d``."""
    if d < 2:
        raise ValueError("Gell-Mann basis needs d >= 2, got %r" % d)
    mats = []
    pairs = [(j, k) for j in range(d) for k in range(j + 1, d)]
    for j, k in pairs:
        m = np.zeros((d, d), dtype=np.complex128)
        m[j, k] = 1.0
        m[k, j] = 1.0
        mats.append(m)
    for j, k in pairs:
        m = np.zeros((d, d), dtype=np.complex128)
        m[j, k] = -1.0j
        m[k, j] = 1.0j
        mats.append(m)
    for l in range(1, d):
        diag = np.zeros(d, dtype=np.complex128)
        diag[:l] = 1.0
        diag[l] = -l
        mats.append(math.sqrt(2.0 / (l * (l + 1))) * np.diag(diag))
    return GellMannBasis(d, np.stack(mats))


def bases_for(dims) -> tuple:
    """One basis per subsystem, in subsystem order 1..N."""
    return tuple(generate(d) for d in dims)
