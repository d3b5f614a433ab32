import numpy as np
import pytest

from escapesim.geometry import Point2
from escapesim.params import StartConfiguration


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def worked_start():
    """The worked eps=0.5 starting geometry used throughout the docs/tests."""
    return StartConfiguration(
        man_start=Point2(0.0, 0.0),
        lion_starts=(Point2(1.0, 0.0), Point2(0.0, 1.0), Point2(-1.0, 0.0)),
        eps=0.5,
    )
