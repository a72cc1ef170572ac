import hypothesis
import pytest

from qwsearch import cycle_graph, torus2d_graph

hypothesis.settings.register_profile(
    "numeric", deadline=None, max_examples=50, derandomize=True
)
hypothesis.settings.load_profile("numeric")


@pytest.fixture
def cycle5():
    return cycle_graph(5)


@pytest.fixture
def torus4():
    return torus2d_graph(4, 4)


@pytest.fixture
def torus16():
    return torus2d_graph(16, 16)
