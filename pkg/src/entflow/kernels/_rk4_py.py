"""Pure-numpy integration kernel; reference implementation and fallback.

Mirrors the compiled kernel in ``_rk4.pyx`` step for step.  The right-hand
side evaluates the damped flow

    dpsi/ds = -i H psi - (Q - <Q>) psi

with every expectation value divided by <psi|psi>, so the continuous flow
conserves the norm exactly even on the slightly off-sphere intermediate
Runge-Kutta stage states.
"""

from __future__ import annotations

import math

import numpy as np


def _subsystem_geometry(dims, sub):
    d = dims[sub]
    low = 1
    for m in range(sub):
        low *= dims[m]
    total = 1
    for m in dims:
        total *= m
    high = total // (low * d)
    return low, d, high


def _rhs(psi, lam1, lam2, geo1, geo2, eta, ham):
    """Returns (dpsi/ds, tau)."""
    low1, d1, high1 = geo1
    low2, d2, high2 = geo2
    K1 = lam1.shape[0]
    K2 = lam2.shape[0]
    D = psi.shape[0]
    n2 = float(np.vdot(psi, psi).real)
    A = np.einsum("kab,hbl->khal", lam1, psi.reshape(high1, d1, low1)).reshape(K1, D)
    B = np.einsum("kab,hbl->khal", lam2, psi.reshape(high2, d2, low2)).reshape(K2, D)
    conj = psi.conj()
    e1 = (A @ conj).real / n2
    e2 = (B @ conj).real / n2
    cov = (A @ B.conj().T).real / n2 - np.outer(e1, e2)
    tau = eta * float(np.sum(cov * cov))
    u = cov.T @ A
    v = np.einsum("kab,khbl->hal", lam2, u.reshape(K2, high2, d2, low2)).reshape(-1)
    w = (cov @ e2) @ A
    out = -eta * (v - w) + tau * psi
    if ham is not None:
        out = out - 1j * (ham @ psi)
    return out, tau


def _tau_only(psi, lam1, lam2, geo1, geo2, eta):
    low1, d1, high1 = geo1
    low2, d2, high2 = geo2
    K1 = lam1.shape[0]
    K2 = lam2.shape[0]
    D = psi.shape[0]
    n2 = float(np.vdot(psi, psi).real)
    A = np.einsum("kab,hbl->khal", lam1, psi.reshape(high1, d1, low1)).reshape(K1, D)
    B = np.einsum("kab,hbl->khal", lam2, psi.reshape(high2, d2, low2)).reshape(K2, D)
    conj = psi.conj()
    e1 = (A @ conj).real / n2
    e2 = (B @ conj).real / n2
    cov = (A @ B.conj().T).real / n2 - np.outer(e1, e2)
    return eta * float(np.sum(cov * cov))


def evolve_rk4(
    psi0,
    dims,
    first,
    second,
    lam1,
    lam2,
    eta,
    ham,
    ds,
    nsteps,
    record_stride,
    renormalize,
    early_stop_tau,
):
    dims = tuple(int(d) for d in dims)
    psi = np.array(psi0, dtype=np.complex128)
    D = psi.shape[0]
    geo1 = _subsystem_geometry(dims, first)
    geo2 = _subsystem_geometry(dims, second)
    lam1 = np.ascontiguousarray(lam1, dtype=np.complex128)
    lam2 = np.ascontiguousarray(lam2, dtype=np.complex128)
    if ham is not None:
        ham = np.ascontiguousarray(ham, dtype=np.complex128)

    capacity = nsteps // record_stride + 2
    times = np.empty(capacity, dtype=np.float64)
    states = np.empty((capacity, D), dtype=np.complex128)
    taus = np.empty(capacity, dtype=np.float64)
    nrec = 0
    max_drift = 0.0
    status = 0
    stop_step = nsteps
    half = 0.5 * ds
    sixth = ds / 6.0

    k = 0
    stopped = False
    while k < nsteps:
        k1, tau_k = _rhs(psi, lam1, lam2, geo1, geo2, eta, ham)
        if k % record_stride == 0:
            times[nrec] = k * ds
            states[nrec] = psi
            taus[nrec] = tau_k
            nrec += 1
        if early_stop_tau >= 0.0 and tau_k <= early_stop_tau:
            stop_step = k
            stopped = True
            break
        k2, _ = _rhs(psi + half * k1, lam1, lam2, geo1, geo2, eta, ham)
        k3, _ = _rhs(psi + half * k2, lam1, lam2, geo1, geo2, eta, ham)
        k4, _ = _rhs(psi + ds * k3, lam1, lam2, geo1, geo2, eta, ham)
        psi = psi + sixth * (k1 + 2.0 * (k2 + k3) + k4)
        nrm2 = float(np.vdot(psi, psi).real)
        if not (nrm2 == nrm2) or nrm2 > 1e12 or nrm2 < 1e-12:
            status = 1
            stop_step = k + 1
            return (
                times[:nrec].copy(),
                states[:nrec].copy(),
                taus[:nrec].copy(),
                max_drift,
                status,
                stop_step,
            )
        nrm = math.sqrt(nrm2)
        drift = abs(nrm - 1.0)
        if drift > max_drift:
            max_drift = drift
        if renormalize:
            psi /= nrm
        k += 1

    # final sample (at the stop step when early-stopped, else at nsteps)
    final_step = stop_step if stopped else nsteps
    if nrec == 0 or times[nrec - 1] != final_step * ds:
        times[nrec] = final_step * ds
        states[nrec] = psi
        taus[nrec] = _tau_only(psi, lam1, lam2, geo1, geo2, eta)
        nrec += 1
    return (
        times[:nrec].copy(),
        states[:nrec].copy(),
        taus[:nrec].copy(),
        max_drift,
        status,
        stop_step,
    )
