import numpy as np
import pytest

from entflow.dynamics import EvolutionConfig
from entflow.entanglement import PairSelector
from entflow.hilbert import as_dims
from entflow.statelib import state_from_text

SEED = 20250809


@pytest.fixture
def qubits():
    return as_dims((2, 2, 2))


@pytest.fixture
def rng():
    return np.random.default_rng(SEED)


@pytest.fixture
def pair12(qubits):
    return PairSelector.for_dims(qubits, 1, 2)


@pytest.fixture
def config12(pair12):
    return EvolutionConfig(pair=pair12)


@pytest.fixture
def fig1_initial():
    # perturbed GHZ state from the first trajectory experiment
    return state_from_text("ghz - 1e-5*i*bell1(pi) - 5.2e-4*i*bell2(pi)")


@pytest.fixture
def fig1_target():
    return state_from_text("|000> + i*|010> + i*|101> - |111>")


@pytest.fixture
def fig3_initial():
    return state_from_text("bell3(pi) + 9e-5*i*bell2(pi)")
