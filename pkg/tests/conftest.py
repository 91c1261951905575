import pytest

from pppkit.regions import Box


@pytest.fixture
def unit_square():
    return Box((0.0, 0.0), (1.0, 1.0))


@pytest.fixture
def left_half():
    return Box((0.0, 0.0), (0.5, 1.0))
