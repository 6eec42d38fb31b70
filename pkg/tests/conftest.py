import pytest

from stobruss.model import BrusselatorParams


@pytest.fixture
def turing():
    return BrusselatorParams(A=1.0, B=1.8, d_u=5e-5, d_v=2e-3)


@pytest.fixture
def stable():
    return BrusselatorParams(A=1.0, B=1.8, d_u=2e-3, d_v=1e-3)


@pytest.fixture
def nonlinear_stable():
    return BrusselatorParams(A=1.0, B=1.95, d_u=1e-3, d_v=2e-3)
