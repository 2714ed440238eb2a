import numpy as np
import pytest

from vpwgraph.dataset import DataMatrix, gen_toroidal_helix, gen_uneven_blobs


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def small_blobs():
    return gen_uneven_blobs([(0, 0), (6, 0)], [60, 20], [0.5, 2.0], seed=3)


@pytest.fixture(scope="session")
def small_helix():
    return gen_toroidal_helix(n=300, coils=4, noise_sd=0.0, seed=1)


def random_cloud(seed, n=60, D=3):
    return DataMatrix(np.random.default_rng(seed).normal(size=(n, D)))
