"""
Shared fixtures for the test suite.
"""
import os

import numpy as np
import pytest

from varsel_engine.generator import SimSpec, generate
from varsel_engine.models import Dataset
from varsel_engine.predictor_space import PredictorSpace


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def space5():
    """Five main effects, 15 terms in total."""
    return PredictorSpace(5)


@pytest.fixture
def sim5():
    """Simulated data with a known true set {x1, x2, x1:x2}."""
    return generate(SimSpec(n_main=5, n_samples=1000, true_terms=["x1", "x2", "x1:x2"], rng_seed=7))


@pytest.fixture
def noisy_dataset():
    """A small dataset without perfect separation."""
    rng = np.random.default_rng(3)
    x = rng.standard_normal((300, 4))
    eta = 0.5 + 1.2 * x[:, 0] - 0.8 * x[:, 1] + 0.6 * x[:, 0] * x[:, 2]
    y = (rng.random(300) < 1.0 / (1.0 + np.exp(-eta))).astype(int)
    return Dataset(x, y, standardized=False)


@pytest.fixture
def wine_path():
    path = os.environ.get("VARSEL_WINE_PATH")
    if not path or not os.path.isfile(path):
        pytest.skip("VARSEL_WINE_PATH not set to the white-wine quality file")
    return path


@pytest.fixture
def ctg_path():
    path = os.environ.get("VARSEL_CTG_PATH")
    if not path or not os.path.isfile(path):
        pytest.skip("VARSEL_CTG_PATH not set to the cardiotocography CSV")
    return path
