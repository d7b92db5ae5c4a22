import numpy as np
import pytest

from pairdeg import ModelSpec

PSEUDO_DP_G = -1j / (4 * np.sqrt(2))


@pytest.fixture(scope="session")
def model():
    """Reference three-level model: eps=(0,1,2), Omega=(2,6,2), 2 pairs, gamma=-1/2."""
    return ModelSpec.from_arrays([0.0, 1.0, 2.0], [2, 6, 2], 2, -0.5)


@pytest.fixture(scope="session")
def model_049():
    return ModelSpec.from_arrays([0.0, 1.0, 2.0], [2, 6, 2], 2, -0.49)


@pytest.fixture(scope="session")
def pseudo_dp():
    return PSEUDO_DP_G
