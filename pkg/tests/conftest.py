import numpy as np
import pytest

from compatdim.constructions import PAULI_X, PAULI_Y, PAULI_Z
from compatdim.povm import Povm


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def binary_povm(obs):
    eye = np.eye(obs.shape[0])
    return Povm([(eye + obs) / 2, (eye - obs) / 2])


@pytest.fixture
def paulis():
    return PAULI_X, PAULI_Y, PAULI_Z
