import pytest

from spanemu.core.graph import Graph, generate_graph


@pytest.fixture
def c5():
    return generate_graph("cycle", {"n": 5})


@pytest.fixture
def star8():
    # center 0, leaves 1..8
    return generate_graph("star", {"leaves": 8})


@pytest.fixture
def path3():
    return Graph(3, [(0, 1), (1, 2)])


@pytest.fixture
def config_file(tmp_path):
    """A config file that keeps the CLI away from any spanemu.yaml on the machine"""
    path = tmp_path / "spanemu.yaml"
    path.write_text("options:\n  workers: 1\n")
    return str(path)
