import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from spike_detect.tracy_widom import default_table  # noqa: E402


@pytest.fixture(scope="session")
def tw_table():
    return default_table()


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def cgauss(rng, shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)
