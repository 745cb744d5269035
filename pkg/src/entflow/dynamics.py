"""The damped flow: right-hand side, norm-preserving RK4 stepping, and
trajectory recording.

The equation of motion, in the dimensionless time s = gamma * t, is

    dpsi/ds = [ -i H' - (Q - <Q>) ] psi

where H' = H / (hbar * gamma) and Q is the nonlinear pair generator from
:mod:`entflow.entanglement`.  Written this way neither gamma nor hbar
appears numerically; a physical final time t = 50 / gamma is simply
``duration = 50``.  With H' = 0 the flow monotonically damps the pair
measure tau while conserving the norm.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from . import entanglement, gellmann, kernels
from .entanglement import EntanglementReport, PairSelector
from .hilbert import DenseOperator, StateVector, _require_normalized

DEFAULT_STEP = 1e-3
DEFAULT_DURATION = 50.0
DEFAULT_RECORD_STRIDE = 100

#: per-step pre-renormalization norm drift allowed for a single RK4 step
#: (local truncation is O(ds^5), so this is generous at the default step)
STEP_DRIFT_TOL = 1e-8


class NumericalFailure(RuntimeError):
    """Amplitudes became non-finite during integration."""

    def __init__(self, message: str, s: float):
        super().__init__(message)
        self.s = s


@dataclass(frozen=True)
class EvolutionConfig:
    """Integration parameters for one trajectory."""

    pair: PairSelector
    hamiltonian: Optional[DenseOperator] = None
    step: float = DEFAULT_STEP
    duration: float = DEFAULT_DURATION
    record_stride: int = DEFAULT_RECORD_STRIDE
    renormalize_each_step: bool = True
    early_stop_tau: Optional[float] = None

    def __post_init__(self):
        if not self.step > 0:
            raise ValueError("step must be positive, got %r" % (self.step,))
        if not self.duration > 0:
            raise ValueError("duration must be positive, got %r" % (self.duration,))
        if self.record_stride < 1:
            raise ValueError("record_stride must be >= 1")
        if self.hamiltonian is not None and not self.hamiltonian.is_hermitian():
            raise ValueError("hamiltonian must be Hermitian within 1e-12")

    @property
    def n_steps(self) -> int:
        """Number of whole RK4 steps covering the duration."""
        n = int(round(self.duration / self.step))
        if n < 1 or abs(n * self.step - self.duration) > 1e-9 * max(1.0, self.duration):
            raise ValueError(
                "duration %r is not a whole number of steps of %r" % (self.duration, self.step)
            )
        return n


@dataclass(frozen=True)
class TrajectorySample:
    s: float
    state: StateVector
    report: EntanglementReport


@dataclass(frozen=True)
class Trajectory:
    """Recorded time series of one evolution."""

    samples: tuple
    config: EvolutionConfig
    max_norm_deviation: float

    @property
    def final_state(self) -> StateVector:
        return self.samples[-1].state

    @property
    def final_report(self) -> EntanglementReport:
        return self.samples[-1].report

    def times(self) -> np.ndarray:
        return np.array([s.s for s in self.samples])

    def tau_series(self, first: int, second: int) -> np.ndarray:
        return np.array([s.report.tau_of(first, second) for s in self.samples])

    def bloch_length_series(self, n: int) -> np.ndarray:
        return np.array([s.report.bloch_lengths[n - 1] for s in self.samples])


def _kernel_args(psi: StateVector, config: EvolutionConfig):
    dims = psi.dims
    dims._check_subsystem(config.pair.first)
    dims._check_subsystem(config.pair.second)
    lam1 = gellmann.generate(dims.dim(config.pair.first)).matrices
    lam2 = gellmann.generate(dims.dim(config.pair.second)).matrices
    ham = None
    if config.hamiltonian is not None:
        if config.hamiltonian.dims.dims != dims.dims:
            raise ValueError("hamiltonian dims do not match the state")
        ham = config.hamiltonian.matrix
    return dims, lam1, lam2, ham


def rhs(psi: StateVector, config: EvolutionConfig) -> np.ndarray:
    """dpsi/ds at a normalized state; numpy reference path."""
    _require_normalized(psi)
    _, _, _, ham = _kernel_args(psi, config)
    q_psi = entanglement.apply_Q(psi, config.pair)
    tau = entanglement.covariance_tensor(psi, config.pair).tau()
    out = -(q_psi - tau * psi.amplitudes)
    if ham is not None:
        out = out - 1j * (ham @ psi.amplitudes)
    return out


def step(psi: StateVector, config: EvolutionConfig) -> StateVector:
    """One RK4 step of size ``config.step``."""
    _require_normalized(psi)
    dims, lam1, lam2, ham = _kernel_args(psi, config)
    times, states, taus, drift, status, stop_step = kernels.evolve_rk4(
        psi.amplitudes,
        dims.dims,
        config.pair.first - 1,
        config.pair.second - 1,
        lam1,
        lam2,
        config.pair.eta,
        ham,
        config.step,
        1,
        1,
        config.renormalize_each_step,
        -1.0,
    )
    if status != kernels.STATUS_OK:
        raise NumericalFailure("non-finite amplitudes after one step", s=config.step)
    if config.step <= 1e-2 and drift > STEP_DRIFT_TOL:
        raise NumericalFailure(
            "pre-renormalization norm drift %.3e exceeds %.1e in a single step"
            % (drift, STEP_DRIFT_TOL),
            s=config.step,
        )
    return StateVector(states[-1], dims, normalized=config.renormalize_each_step)


def evolve(psi0: StateVector, config: EvolutionConfig) -> Trajectory:
    """Integrate to ``config.duration``, recording every ``record_stride`` steps.

    Sampled states are unit norm (within integrator tolerance); with H' = 0
    the recorded tau of the evolving pair is non-increasing up to
    integrator noise.
    """
    _require_normalized(psi0)
    dims, lam1, lam2, ham = _kernel_args(psi0, config)
    early = -1.0 if config.early_stop_tau is None else float(config.early_stop_tau)
    times, states, taus, drift, status, stop_step = kernels.evolve_rk4(
        psi0.amplitudes,
        dims.dims,
        config.pair.first - 1,
        config.pair.second - 1,
        lam1,
        lam2,
        config.pair.eta,
        ham,
        config.step,
        config.n_steps,
        config.record_stride,
        config.renormalize_each_step,
        early,
    )
    if status != kernels.STATUS_OK:
        raise NumericalFailure(
            "non-finite amplitudes at s = %.6g" % (stop_step * config.step),
            s=stop_step * config.step,
        )
    bases = gellmann.bases_for(dims)
    samples = []
    for s, amps in zip(times, states):
        nrm = np.linalg.norm(amps)
        state = StateVector(amps / nrm, dims, normalized=True)
        samples.append(
            TrajectorySample(float(s), state, entanglement.report(state, time=float(s), bases=bases))
        )
    return Trajectory(tuple(samples), config, float(drift))
