import numpy as np
import pytest

from respclass.core import Constant, Dataset, PerObservation
from respclass.synthetic import ScenarioSpec, generate


def make_dataset(n=200, d=2, seed=0, e=None):
    """Random (X, t, y) rows; ``e`` may be a float or 'random' for per-row propensities."""
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, d))
    t = rng.choice([-1, 1], size=n)
    y = rng.choice([-1, 1], size=n)
    if e is None:
        prop = Constant(0.5)
    elif e == "random":
        prop = PerObservation(rng.uniform(0.1, 0.9, size=n))
    else:
        prop = Constant(e)
    return Dataset(X, t, y, prop)


@pytest.fixture
def small_ds():
    return make_dataset()


@pytest.fixture(scope="session")
def linear_data():
    return generate(ScenarioSpec("linear", 2, n=2000, seed=11))
