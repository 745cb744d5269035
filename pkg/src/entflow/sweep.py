"""Two-parameter perturbation sweeps and basin-of-attraction maps.

A sweep evolves, for every grid point (eps1, eps2), the normalized state

    base + i*eps1*direction1 + i*eps2*direction2

to the configured final time and classifies the endpoint by which pair
member became separable.  Cells are independent; they may be farmed out
to worker processes, and results land in pre-assigned row-major slots so
output never depends on scheduling.  Cells that fail numerically are
recorded as such, not raised: separatrix neighborhoods are expected to
produce awkward cells and the map must survive them.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from . import statelib
from .dynamics import EvolutionConfig, NumericalFailure, Trajectory, evolve
from .entanglement import EntanglementReport, PairSelector, max_bloch_length
from .hilbert import StateVector, SubsystemDims, as_dims
from .statelib import StateExpr, build_state

DEFAULT_BASIN_TOL = 1e-3
DEFAULT_EPS_RANGE = (-1e-3, 1e-3)
DEFAULT_EPS_COUNT = 41

STATUS_OK = "ok"
STATUS_NUMERICAL_FAILURE = "numerical_failure"
BASIN_UNRESOLVED = "unresolved"


@dataclass(frozen=True)
class GridSpec:
    """A linear grid of perturbation strengths."""

    lo: float
    hi: float
    count: int

    def __post_init__(self):
        if self.count < 2:
            raise ValueError("grid needs at least 2 points, got %d" % self.count)
        if not self.lo < self.hi:
            raise ValueError("grid bounds must satisfy lo < hi")

    def values(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.count)


@dataclass(frozen=True)
class SweepSpec:
    """Everything needed to reproduce a basin map."""

    base: StateExpr
    direction1: StateExpr
    direction2: StateExpr
    grid1: GridSpec
    grid2: GridSpec
    evolution: EvolutionConfig
    dims: SubsystemDims = field(default_factory=lambda: as_dims((2, 2, 2)))
    basin_tol: float = DEFAULT_BASIN_TOL

    def __post_init__(self):
        object.__setattr__(self, "dims", as_dims(self.dims))
        if not 0.0 < self.basin_tol < 0.1:
            raise ValueError("basin_tol must lie in (0, 0.1), got %r" % (self.basin_tol,))


@dataclass(frozen=True)
class SweepCell:
    eps1: float
    eps2: float
    report: Optional[EntanglementReport]
    basin: str
    status: str


@dataclass
class SweepResult:
    spec: SweepSpec
    eps1_values: np.ndarray
    eps2_values: np.ndarray
    cells: list  # row-major: index = i1 * count2 + i2
    metadata: dict = field(default_factory=dict)

    def cell(self, i1: int, i2: int) -> SweepCell:
        return self.cells[i1 * len(self.eps2_values) + i2]


def classify_basin(
    report: EntanglementReport,
    tol: float = DEFAULT_BASIN_TOL,
    pair: PairSelector = None,
    dims=None,
) -> str:
    """Label an endpoint by which member of the damped pair separated.

    'B<n>' when exactly the first (resp. second) member's Bloch length
    reached its separable maximum within ``tol``; 'unresolved' when
    neither or both did.
    """
    first, second = (1, 2) if pair is None else (pair.first, pair.second)
    lengths = report.bloch_lengths
    if dims is None:
        cap1 = cap2 = 1.0  # qubit convention
    else:
        dims = as_dims(dims)
        cap1 = max_bloch_length(dims.dim(first))
        cap2 = max_bloch_length(dims.dim(second))
    sep1 = lengths[first - 1] >= cap1 * (1.0 - tol)
    sep2 = lengths[second - 1] >= cap2 * (1.0 - tol)
    if sep1 and not sep2:
        return "B%d" % first
    if sep2 and not sep1:
        return "B%d" % second
    return BASIN_UNRESOLVED


def initial_state(spec: SweepSpec, eps1: float, eps2: float) -> StateVector:
    """The normalized perturbed state of one cell."""
    base = build_state(spec.base, spec.dims).amplitudes
    d1 = build_state(spec.direction1, spec.dims).amplitudes
    d2 = build_state(spec.direction2, spec.dims).amplitudes
    return _combine(base, d1, d2, eps1, eps2, spec.dims)


def _combine(base, d1, d2, eps1, eps2, dims) -> StateVector:
    amps = base + 1j * eps1 * d1 + 1j * eps2 * d2
    nrm = float(np.linalg.norm(amps))
    if nrm < statelib.DEGENERATE_NORM_TOL:
        raise statelib.DegenerateStateError(
            "perturbed state vanished at eps = (%g, %g)" % (eps1, eps2)
        )
    return StateVector(amps / nrm, dims, normalized=True)


# --- cell execution (top level so worker processes can import it) ----------

_G: dict = {}


def _init_worker(payload: dict):
    global _G
    _G = payload


def _final_only(config: EvolutionConfig) -> EvolutionConfig:
    # recording only the endpoint leaves the stepping arithmetic untouched
    return replace(config, record_stride=max(config.n_steps, 1))


def _run_cell_payload(payload: dict, i1: int, i2: int) -> SweepCell:
    eps1 = float(payload["eps1_values"][i1])
    eps2 = float(payload["eps2_values"][i2])
    dims = as_dims(payload["dims"])
    psi0 = _combine(payload["base"], payload["dir1"], payload["dir2"], eps1, eps2, dims)
    config = payload["config"]
    try:
        trajectory = evolve(psi0, _final_only(config))
    except NumericalFailure:
        return SweepCell(eps1, eps2, None, BASIN_UNRESOLVED, STATUS_NUMERICAL_FAILURE)
    report = trajectory.final_report
    basin = classify_basin(report, payload["basin_tol"], config.pair, dims)
    return SweepCell(eps1, eps2, report, basin, STATUS_OK)


def _run_chunk(bounds):
    start, stop = bounds
    count2 = len(_G["eps2_values"])
    out = []
    for flat in range(start, stop):
        i1, i2 = divmod(flat, count2)
        out.append((flat, _run_cell_payload(_G, i1, i2)))
    return out


def _payload(spec: SweepSpec) -> dict:
    return {
        "base": build_state(spec.base, spec.dims).amplitudes,
        "dir1": build_state(spec.direction1, spec.dims).amplitudes,
        "dir2": build_state(spec.direction2, spec.dims).amplitudes,
        "dims": spec.dims.dims,
        "config": spec.evolution,
        "basin_tol": spec.basin_tol,
        "eps1_values": spec.grid1.values(),
        "eps2_values": spec.grid2.values(),
    }


def run_cell(spec: SweepSpec, eps1: float, eps2: float) -> SweepCell:
    """Evolve a single off-grid cell with the sweep's exact cell machinery."""
    payload = _payload(spec)
    payload["eps1_values"] = np.array([eps1])
    payload["eps2_values"] = np.array([eps2])
    return _run_cell_payload(payload, 0, 0)


def run_sweep(spec: SweepSpec, workers: int = 1) -> SweepResult:
    """Run every cell; results are identical for any worker count."""
    if workers < 1:
        raise ValueError("workers must be >= 1")
    payload = _payload(spec)
    eps1_values = payload["eps1_values"]
    eps2_values = payload["eps2_values"]
    n_cells = len(eps1_values) * len(eps2_values)
    cells = [None] * n_cells

    chunk = max(1, math.ceil(n_cells / (workers * 4)))
    bounds = [(start, min(start + chunk, n_cells)) for start in range(0, n_cells, chunk)]
    if workers == 1:
        _init_worker(payload)
        results = map(_run_chunk, bounds)
    else:
        executor = ProcessPoolExecutor(
            max_workers=workers, initializer=_init_worker, initargs=(payload,)
        )
        try:
            results = list(executor.map(_run_chunk, bounds))
        finally:
            executor.shutdown()
    for part in results:
        for flat, cell in part:
            cells[flat] = cell
    return SweepResult(spec, eps1_values, eps2_values, cells)
