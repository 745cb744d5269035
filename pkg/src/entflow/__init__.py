"""entflow: deterministic pairwise disentanglement flows for finite
multipartite quantum systems.

The package integrates a nonlinearly damped Schroedinger flow that
monotonically suppresses the covariance-based entanglement measure of one
chosen subsystem pair, and maps the basins of attraction this flow carves
out of the state space.
"""

__version__ = "0.1.0"

from .hilbert import (
    DenseOperator,
    DimensionMismatchError,
    DigitRangeError,
    LocalOperator,
    StateVector,
    SubsystemDims,
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
from .gellmann import GellMannBasis, generate
from .entanglement import (
    CovarianceTensor,
    EntanglementReport,
    PairSelector,
    apply_Q,
    bloch_vector,
    classify_separability,
    covariance_tensor,
    default_eta,
    dense_Q,
    report,
    tau,
)
from .statelib import (
    DegenerateStateError,
    StateExpr,
    StateExprError,
    bell,
    build_state,
    ghz,
    parse_state_expr,
    render_state_expr,
    state_from_text,
)
from .dynamics import (
    EvolutionConfig,
    NumericalFailure,
    Trajectory,
    evolve,
    rhs,
    step,
)
from .sweep import GridSpec, SweepCell, SweepResult, SweepSpec, classify_basin, run_cell, run_sweep
from .kernels import BACKEND

__all__ = [name for name in dir() if not name.startswith("_")]
