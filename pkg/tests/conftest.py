import numpy as np
import pytest

from longwave.filters import make_bank


@pytest.fixture(scope="session")
def bank44():
    return make_bank("cfw-c", 4, 4)


@pytest.fixture(scope="session")
def bank22():
    return make_bank("cfw-c", 2, 2)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
