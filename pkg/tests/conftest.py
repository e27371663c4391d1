import numpy as np
import pytest

from pulse_atlas import linalg


@pytest.fixture(autouse=True)
def verified_solves():
    """Every linear solve in the suite re-checks its own residual."""
    previous = linalg.VERIFY_SOLVES
    linalg.VERIFY_SOLVES = True
    yield
    linalg.VERIFY_SOLVES = previous


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
