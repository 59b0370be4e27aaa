import os

import numpy as np
import pytest

from graddens.catalog import catalog_lookup
from graddens.core import DensityEstimate, make_grid

SEEDS = range(100)


def pytest_collection_modifyitems(config, items):
    if os.getenv('GRADDENS_FULL') == '1':
        return
    skip = pytest.mark.skip(reason="wall-clock scaling check; set GRADDENS_FULL=1")
    for item in items:
        if 'envsensitive' in item.keywords:
            item.add_marker(skip)


@pytest.fixture(scope='session')
def quadratic():
    return catalog_lookup('quadratic')


@pytest.fixture(scope='session')
def sinusoid():
    return catalog_lookup('sinusoid')


@pytest.fixture(scope='session')
def exponential():
    return catalog_lookup('exponential')


@pytest.fixture(scope='session')
def sum_of_sinusoids():
    return catalog_lookup('sum_of_sinusoids')


@pytest.fixture(scope='session')
def linear_degenerate():
    return catalog_lookup('linear_degenerate')


@pytest.fixture(scope='session')
def catalog(quadratic, sinusoid, exponential, sum_of_sinusoids):
    """Members satisfying the measure-zero curvature condition."""
    return {tf.name: tf for tf in (quadratic, sinusoid, exponential, sum_of_sinusoids)}


@pytest.fixture
def grid_for():
    def build(tf, n):
        return make_grid(tf.b1, tf.b2, n)
    return build


def random_density(rng, m=None, start=None, du=None) -> DensityEstimate:
    """A random unit-mass estimate on a uniform grid."""
    m = m if m is not None else int(rng.integers(8, 64))
    du = du if du is not None else float(rng.uniform(0.01, 0.5))
    start = start if start is not None else float(rng.uniform(-2, 2))
    u = start + np.arange(m) * du
    return DensityEstimate.normalized(u, rng.uniform(0, 1, m), du)
