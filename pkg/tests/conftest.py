import numpy as np
import pytest

from odt.core import Dataset


@pytest.fixture
def ds4():
    """Four points on a line, two per class."""
    return Dataset.from_labels([1.0, 2.0, 3.0, 4.0], ["A", "A", "B", "B"])


@pytest.fixture
def xor():
    return Dataset.from_labels([[0, 0], [0, 1], [1, 0], [1, 1]], ["A", "B", "B", "A"])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
