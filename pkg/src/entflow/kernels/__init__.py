"""Integration kernels: a compiled Cython core with a pure-numpy fallback.

Both backends expose the same ``evolve_rk4`` entry point and identical
record semantics; the backend is picked once at import time.  Set the
environment variable ``ENTFLOW_PURE_PYTHON=1`` to force the fallback
(useful for benchmarking, see ``benchmarks/bench_kernels.py``).

evolve_rk4(psi0, dims, first, second, lam1, lam2, eta, ham, ds, nsteps,
           record_stride, renormalize, early_stop_tau)
    psi0            (D,) complex initial amplitudes (unit norm)
    dims            tuple of subsystem dimensions (d1, ..., dN)
    first, second   0-based subsystem indices of the damped pair, in order
    lam1, lam2      (K, d, d) stacked generator bases for the two members
    eta             positive pair coefficient
    ham             optional (D, D) complex Hamiltonian in units of
                    hbar*gamma (None for free damping)
    ds              step in dimensionless time s = gamma * t
    nsteps          number of RK4 steps
    record_stride   record every this many steps (plus step 0 and the end)
    renormalize     rescale to unit norm after every step
    early_stop_tau  stop once the pair tau falls to or below this
                    (negative disables)

returns (times, states, taus, max_norm_deviation, status, stop_step):
    times, states, taus   recorded samples; taus is the evolving pair's
                          measure computed with the same eta
    max_norm_deviation    max over steps of |  ||psi|| - 1  | before any
                          renormalization
    status                0 ok, 1 non-finite amplitudes encountered
    stop_step             last completed step (== nsteps unless stopped)
"""

import os

FORCE_FALLBACK_ENV = "ENTFLOW_PURE_PYTHON"


def _select():
    forced = os.environ.get(FORCE_FALLBACK_ENV, "").strip().lower()
    if forced in {"1", "true", "yes", "on"}:
        from . import _rk4_py

        return _rk4_py, "python"
    try:
        from . import _rk4

        return _rk4, "cython"
    except ImportError:
        from . import _rk4_py

        return _rk4_py, "python"


_impl, BACKEND = _select()
evolve_rk4 = _impl.evolve_rk4

STATUS_OK = 0
STATUS_NUMERICAL_FAILURE = 1
