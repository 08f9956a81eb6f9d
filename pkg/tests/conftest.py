"""Shared fixtures and instance generators for the test suite."""

from pathlib import Path

import numpy as np
import pytest

from lokmeans import Dataset, DivergenceSpec, counterexample_instance
from lokmeans.divergence import (
    ITAKURA_SAITO,
    KL,
    SQUARED_EUCLIDEAN,
    SQUARED_MAHALANOBIS,
)

DATA_DIR = Path(__file__).parent / "data"
IRIS_PATH = DATA_DIR / "iris.csv"


def random_instance(rng, n_range=(4, 12), k_range=(2, 4), d_range=(1, 3)):
    """Draw a random weighted instance with strictly positive coordinates.

    Positivity keeps every point inside the domain of all four divergences,
    so the same instance can be reused across divergence kinds.  Returns
    ``(dataset, k)``.
    """
    n = int(rng.integers(n_range[0], n_range[1] + 1))
    d = int(rng.integers(d_range[0], d_range[1] + 1))
    k = int(rng.integers(k_range[0], min(k_range[1], n) + 1))
    while True:
        points = rng.uniform(0.5, 5.0, size=(n, d))
        if np.unique(points, axis=0).shape[0] == n:
            break
    weights = rng.uniform(0.5, 3.0, size=n)
    return Dataset(points, weights), k


def random_spd(rng, d):
    """A random symmetric positive definite matrix of order d."""
    basis = rng.normal(size=(d, d))
    return basis @ basis.T + d * np.eye(d)


def spec_for(kind, rng, d):
    if kind == SQUARED_MAHALANOBIS:
        return DivergenceSpec.squared_mahalanobis(random_spd(rng, d))
    return DivergenceSpec(kind)


ALL_KINDS = (SQUARED_EUCLIDEAN, SQUARED_MAHALANOBIS, KL, ITAKURA_SAITO)


@pytest.fixture()
def counterexample():
    return counterexample_instance()


@pytest.fixture(scope="session")
def iris_csv():
    """Materialize the Iris measurements as a local CSV once per session.

    The file is written from scikit-learn's bundled copy when it is not
    already present; tests that need it are skipped when neither source is
    available.
    """
    if IRIS_PATH.exists():
        return IRIS_PATH
    datasets = pytest.importorskip(
        "sklearn.datasets", reason="iris.csv is absent and scikit-learn is unavailable"
    )
    DATA_DIR.mkdir(exist_ok=True)
    np.savetxt(IRIS_PATH, datasets.load_iris().data, delimiter=",", fmt="%.1f")
    return IRIS_PATH
