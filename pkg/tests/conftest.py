import numpy as np
import pytest

from affine_lab.scenes import load_scene
from affine_lab.singular import analyze


@pytest.fixture(scope="session")
def example1_scene():
    return load_scene("example1")


@pytest.fixture(scope="session")
def example1(example1_scene):
    return example1_scene[1]


@pytest.fixture(scope="session")
def galvez_scene():
    return load_scene("galvez")


@pytest.fixture(scope="session")
def galvez(galvez_scene):
    return galvez_scene[1]


@pytest.fixture(scope="session")
def paraboloid():
    return load_scene("paraboloid")[1]


@pytest.fixture(scope="session")
def example1_curves(example1):
    return analyze(example1)


@pytest.fixture(scope="session")
def galvez_curves(galvez):
    return analyze(galvez)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
