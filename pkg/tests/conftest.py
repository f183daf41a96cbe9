import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def pytest_addoption(parser):
    parser.addoption(
        "--workers",
        action="store",
        default=2,
        type=int,
        help="worker processes for the heavy acceptance experiments",
    )


@pytest.fixture(scope="session")
def workers(request):
    return request.config.getoption("--workers")
