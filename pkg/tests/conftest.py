import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from sgem.calibration import calibrate
from sgem.equilibrium import benchmark_state
from sgem.toydata import make_toy, stationary_growth_tables


@pytest.fixture(scope="session")
def toy22():
    return make_toy(42, 2, 2)


@pytest.fixture(scope="session")
def model22(toy22):
    return calibrate(toy22)


@pytest.fixture(scope="session")
def state22(model22):
    return benchmark_state(model22)


@pytest.fixture(scope="session")
def toy34():
    return make_toy(11, 3, 4)


@pytest.fixture(scope="session")
def model34(toy34):
    return calibrate(toy34)


@pytest.fixture(scope="session")
def state34(model34):
    return benchmark_state(model34)


@pytest.fixture(scope="session")
def model106():
    return calibrate(make_toy(7, 10, 6))


@pytest.fixture(scope="session")
def stationary_model22():
    data = make_toy(42, 2, 2, tfp_spread=0.0)
    return calibrate(data, growth_coefs=stationary_growth_tables())


@pytest.fixture(scope="session")
def stationary_model34():
    data = make_toy(11, 3, 4, tfp_spread=0.0)
    return calibrate(data, growth_coefs=stationary_growth_tables())
