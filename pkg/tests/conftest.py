import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("pertkit", max_examples=25, deadline=None, derandomize=True)
settings.load_profile("pertkit")


@pytest.fixture
def rng():
    return np.random.default_rng(0)
