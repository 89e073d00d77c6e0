import numpy as np
import pytest

from nematic2d import LeslieCoefficients, TorusGrid

# lambda1 = -2, lambda2 = 1; Parodi holds and both alignment weights are positive
GENERIC = (0.5, -1.5, 0.5, 1.0, 1.0, 0.0)
REFERENCE = (0.0, -2.0, 1.0, 4.0, 1.0, 0.0)


@pytest.fixture
def generic():
    return LeslieCoefficients(*GENERIC)


@pytest.fixture
def reference():
    return LeslieCoefficients(*REFERENCE)


@pytest.fixture(scope="module")
def grid32():
    return TorusGrid(32)


@pytest.fixture(scope="module")
def grid64():
    return TorusGrid(64)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
