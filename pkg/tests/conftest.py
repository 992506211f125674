import numpy as np
import pytest

from lmsreg.core import Dataset
from lmsreg.search import is_general_position


def draw_general_position(rng, n, p):
    while True:
        data = Dataset(rng.standard_normal((n, p)), rng.standard_normal(n))
        if is_general_position(data):
            return data


@pytest.fixture
def intercept_data():
    return Dataset(np.ones((5, 1)), [0, 1, 4, 5, 9])


@pytest.fixture
def make_instance():
    return draw_general_position
