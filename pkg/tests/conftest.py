import numpy as np
import pytest


@pytest.fixture
def rng():
    """Fresh seeded generator per test so order never matters."""
    return np.random.default_rng(20240817)
