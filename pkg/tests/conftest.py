import numpy as np
import pytest

from telekin.model import load_robot, make_chain


@pytest.fixture(scope="session")
def h1() -> object:
    return load_robot("h1_2_like")


@pytest.fixture(scope="session")
def g1() -> object:
    return load_robot("g1_like")


@pytest.fixture()
def planar2():
    """2-link planar arm in the XY plane, both joints about +Z."""
    return make_chain([1.0, 1.0], [[0, 0, 1], [0, 0, 1]])


def random_tree(rng: np.random.Generator, max_dof: int = 8):
    """Random serial chain with random axes for oracle sweeps."""
    n = int(rng.integers(2, max_dof + 1))
    lengths = rng.uniform(0.1, 0.5, size=n)
    axes = rng.normal(size=(n, 3))
    axes /= np.linalg.norm(axes, axis=1, keepdims=True)
    return make_chain(lengths.tolist(), axes.tolist())
