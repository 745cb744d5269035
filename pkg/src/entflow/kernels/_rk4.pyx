# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled integration kernel; see kernels/__init__ for the contract.

Mirrors ``_rk4_py.evolve_rk4``: classical RK4 with the nonlinear damping
generator re-evaluated at every stage, expectation values normalized by
<psi|psi>, optional per-step renormalization, stride-based recording.
"""

from libc.math cimport sqrt, fabs
from libc.string cimport memcpy, memset

import numpy as np
cimport numpy as cnp

cnp.import_array()

ctypedef double complex dcomplex


cdef void _apply_local_acc(const dcomplex* M, const dcomplex* x, dcomplex* y,
                           int low, int d, int high) noexcept nogil:
    """y += (M on one subsystem) x, generic mixed-radix strides.

    Loops over matrix entries outermost so the inner traversal is one
    strided run per nonzero entry; the generator matrices are sparse
    (two entries for the off-diagonal ones), which this exploits.
    """
    cdef int ih, a, b, il, ybase, xbase
    cdef int blk = d * low
    cdef dcomplex coeff
    for a in range(d):
        for b in range(d):
            coeff = M[a * d + b]
            if coeff != 0:
                ybase = a * low
                xbase = b * low
                if low == 1:
                    for ih in range(high):
                        y[ybase] = y[ybase] + coeff * x[xbase]
                        ybase += blk
                        xbase += blk
                elif high == 1:
                    for il in range(low):
                        y[ybase + il] = y[ybase + il] + coeff * x[xbase + il]
                else:
                    for ih in range(high):
                        for il in range(low):
                            y[ybase + il] = y[ybase + il] + coeff * x[xbase + il]
                        ybase += blk
                        xbase += blk


cdef void _apply_local(const dcomplex* M, const dcomplex* x, dcomplex* y,
                       int low, int d, int high) noexcept nogil:
    """y = (M on one subsystem) x."""
    memset(y, 0, high * d * low * sizeof(dcomplex))
    _apply_local_acc(M, x, y, low, d, high)


cdef double _dot_re(const dcomplex* a, const dcomplex* b, int n) noexcept nogil:
    """Re <a|b> = Re sum conj(a_i) b_i."""
    cdef int i
    cdef double acc = 0.0
    for i in range(n):
        acc += a[i].real * b[i].real + a[i].imag * b[i].imag
    return acc


cdef double _norm2(const dcomplex* x, int n) noexcept nogil:
    cdef int i
    cdef double acc = 0.0
    for i in range(n):
        acc += x[i].real * x[i].real + x[i].imag * x[i].imag
    return acc


cdef double _covariance(const dcomplex* psi,
                        const dcomplex* lam1, const dcomplex* lam2,
                        int K1, int d1, int low1, int high1,
                        int K2, int d2, int low2, int high2,
                        double eta,
                        dcomplex* A, dcomplex* B,
                        double* e1, double* e2, double* cov,
                        int D) noexcept nogil:
    """Fill A, B, e1, e2, cov for the current state; returns tau."""
    cdef int a, b
    cdef double n2, tau, c
    n2 = _norm2(psi, D)
    for a in range(K1):
        _apply_local(lam1 + a * d1 * d1, psi, A + a * D, low1, d1, high1)
    for b in range(K2):
        _apply_local(lam2 + b * d2 * d2, psi, B + b * D, low2, d2, high2)
    for a in range(K1):
        e1[a] = _dot_re(psi, A + a * D, D) / n2
    for b in range(K2):
        e2[b] = _dot_re(psi, B + b * D, D) / n2
    tau = 0.0
    for a in range(K1):
        for b in range(K2):
            # <l_a m_b> = Re <B_b|A_a>, real because the pair commutes
            c = _dot_re(B + b * D, A + a * D, D) / n2 - e1[a] * e2[b]
            cov[a * K2 + b] = c
            tau += c * c
    return eta * tau


cdef double _rhs(const dcomplex* psi, dcomplex* out,
                 const dcomplex* lam1, const dcomplex* lam2,
                 int K1, int d1, int low1, int high1,
                 int K2, int d2, int low2, int high2,
                 double eta, const dcomplex* ham, bint has_ham,
                 dcomplex* A, dcomplex* B, dcomplex* U,
                 double* e1, double* e2, double* cov,
                 int D) noexcept nogil:
    """out = dpsi/ds; returns tau of the evolving pair."""
    cdef int a, b, i
    cdef double tau, c, g
    cdef dcomplex acc
    tau = _covariance(psi, lam1, lam2, K1, d1, low1, high1, K2, d2, low2, high2,
                      eta, A, B, e1, e2, cov, D)
    # U_b = sum_a cov[a,b] A_a
    memset(U, 0, K2 * D * sizeof(dcomplex))
    for a in range(K1):
        for b in range(K2):
            c = cov[a * K2 + b]
            if c != 0.0:
                for i in range(D):
                    U[b * D + i] = U[b * D + i] + c * A[a * D + i]
    # out = sum_b m_b U_b, then scale by -eta
    for i in range(D):
        out[i] = 0
    for b in range(K2):
        _apply_local_acc(lam2 + b * d2 * d2, U + b * D, out, low2, d2, high2)
    for i in range(D):
        out[i] = -eta * out[i]
    # + eta * sum_a (sum_b cov[a,b] e2[b]) A_a   (the expectation-weighted half)
    for a in range(K1):
        g = 0.0
        for b in range(K2):
            g += cov[a * K2 + b] * e2[b]
        g *= eta
        if g != 0.0:
            for i in range(D):
                out[i] = out[i] + g * A[a * D + i]
    # + tau * psi  (norm-conserving counterterm)
    for i in range(D):
        out[i] = out[i] + tau * psi[i]
    if has_ham:
        for i in range(D):
            acc = 0
            for b in range(D):
                acc = acc + ham[i * D + b] * psi[b]
            out[i] = out[i] - 1j * acc
    return tau


def evolve_rk4(psi0, dims, first, second, lam1, lam2, eta, ham, ds, nsteps,
               record_stride, renormalize, early_stop_tau):
    dims = tuple(int(d) for d in dims)
    cdef cnp.ndarray[dcomplex, ndim=1] psi_arr = np.array(psi0, dtype=np.complex128)
    cdef int D = psi_arr.shape[0]
    cdef int n_first = first
    cdef int n_second = second
    cdef int d1 = dims[n_first]
    cdef int d2 = dims[n_second]
    cdef int low1 = 1, low2 = 1, m
    for m in range(n_first):
        low1 *= dims[m]
    for m in range(n_second):
        low2 *= dims[m]
    cdef int high1 = D // (low1 * d1)
    cdef int high2 = D // (low2 * d2)

    cdef cnp.ndarray[dcomplex, ndim=3] lam1_arr = np.ascontiguousarray(lam1, dtype=np.complex128)
    cdef cnp.ndarray[dcomplex, ndim=3] lam2_arr = np.ascontiguousarray(lam2, dtype=np.complex128)
    cdef int K1 = lam1_arr.shape[0]
    cdef int K2 = lam2_arr.shape[0]

    cdef bint has_ham = ham is not None
    cdef cnp.ndarray[dcomplex, ndim=2] ham_arr
    cdef const dcomplex* ham_p = NULL
    if has_ham:
        ham_arr = np.ascontiguousarray(ham, dtype=np.complex128)
        ham_p = &ham_arr[0, 0]

    cdef double ds_c = ds
    cdef double eta_c = eta
    cdef long nsteps_c = nsteps
    cdef long stride = record_stride
    cdef bint renorm = renormalize
    cdef double stop_tau = early_stop_tau

    cdef long capacity = nsteps_c // stride + 2
    cdef cnp.ndarray[double, ndim=1] times = np.empty(capacity, dtype=np.float64)
    cdef cnp.ndarray[dcomplex, ndim=2] states = np.empty((capacity, D), dtype=np.complex128)
    cdef cnp.ndarray[double, ndim=1] taus = np.empty(capacity, dtype=np.float64)

    # work buffers
    cdef cnp.ndarray[dcomplex, ndim=2] A_buf = np.empty((K1, D), dtype=np.complex128)
    cdef cnp.ndarray[dcomplex, ndim=2] B_buf = np.empty((K2, D), dtype=np.complex128)
    cdef cnp.ndarray[dcomplex, ndim=2] U_buf = np.empty((K2, D), dtype=np.complex128)
    cdef cnp.ndarray[double, ndim=1] e1_buf = np.empty(K1, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] e2_buf = np.empty(K2, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] cov_buf = np.empty(K1 * K2, dtype=np.float64)
    cdef cnp.ndarray[dcomplex, ndim=2] stages = np.empty((5, D), dtype=np.complex128)

    cdef dcomplex* psi = &psi_arr[0]
    cdef const dcomplex* lam1_p = &lam1_arr[0, 0, 0]
    cdef const dcomplex* lam2_p = &lam2_arr[0, 0, 0]
    cdef dcomplex* A = &A_buf[0, 0]
    cdef dcomplex* B = &B_buf[0, 0]
    cdef dcomplex* U = &U_buf[0, 0]
    cdef double* e1 = &e1_buf[0]
    cdef double* e2 = &e2_buf[0]
    cdef double* cov = &cov_buf[0]
    cdef dcomplex* k1 = &stages[0, 0]
    cdef dcomplex* k2 = &stages[1, 0]
    cdef dcomplex* k3 = &stages[2, 0]
    cdef dcomplex* k4 = &stages[3, 0]
    cdef dcomplex* st = &stages[4, 0]

    cdef long nrec = 0, k = 0, stop_step = nsteps_c
    cdef int status = 0
    cdef bint stopped = False
    cdef double max_drift = 0.0, tau_k, nrm2, nrm, drift
    cdef double half = 0.5 * ds_c, sixth = ds_c / 6.0
    cdef int i

    with nogil:
        while k < nsteps_c:
            tau_k = _rhs(psi, k1, lam1_p, lam2_p, K1, d1, low1, high1,
                         K2, d2, low2, high2, eta_c, ham_p, has_ham,
                         A, B, U, e1, e2, cov, D)
            if k % stride == 0:
                times[nrec] = k * ds_c
                memcpy(&states[nrec, 0], psi, D * sizeof(dcomplex))
                taus[nrec] = tau_k
                nrec += 1
            if stop_tau >= 0.0 and tau_k <= stop_tau:
                stop_step = k
                stopped = True
                break
            for i in range(D):
                st[i] = psi[i] + half * k1[i]
            _rhs(st, k2, lam1_p, lam2_p, K1, d1, low1, high1,
                 K2, d2, low2, high2, eta_c, ham_p, has_ham, A, B, U, e1, e2, cov, D)
            for i in range(D):
                st[i] = psi[i] + half * k2[i]
            _rhs(st, k3, lam1_p, lam2_p, K1, d1, low1, high1,
                 K2, d2, low2, high2, eta_c, ham_p, has_ham, A, B, U, e1, e2, cov, D)
            for i in range(D):
                st[i] = psi[i] + ds_c * k3[i]
            _rhs(st, k4, lam1_p, lam2_p, K1, d1, low1, high1,
                 K2, d2, low2, high2, eta_c, ham_p, has_ham, A, B, U, e1, e2, cov, D)
            for i in range(D):
                psi[i] = psi[i] + sixth * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i])
            nrm2 = _norm2(psi, D)
            if not (nrm2 == nrm2) or nrm2 > 1e12 or nrm2 < 1e-12:
                status = 1
                stop_step = k + 1
                break
            nrm = sqrt(nrm2)
            drift = fabs(nrm - 1.0)
            if drift > max_drift:
                max_drift = drift
            if renorm:
                for i in range(D):
                    psi[i] = psi[i] / nrm
            k += 1

    if status == 0:
        final_step = stop_step if stopped else nsteps
        if nrec == 0 or times[nrec - 1] != final_step * ds_c:
            times[nrec] = final_step * ds_c
            for i in range(D):
                states[nrec, i] = psi[i]
            taus[nrec] = _covariance(psi, lam1_p, lam2_p, K1, d1, low1, high1,
                                     K2, d2, low2, high2, eta_c, A, B, e1, e2, cov, D)
            nrec += 1

    return (
        times[:nrec].copy(),
        states[:nrec].copy(),
        taus[:nrec].copy(),
        max_drift,
        status,
        stop_step,
    )
