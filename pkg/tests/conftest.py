import numpy as np
import pytest

from metric_dcov import config
from metric_dcov.data import fixture_path
from metric_dcov.estimators import PairedSample
from metric_dcov.metric_core import (
    DistanceMatrix,
    MetricSpec,
    build_distance_matrix,
    load_matrix,
)
from metric_dcov.population import FiniteJointMeasure, FiniteSignedMeasure

# ---------------------- HOOKS ----------------------


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "slow: long Monte-Carlo property checks (deselect with -m 'not slow')"
    )


# ---------------------- FIXTURES ----------------------


@pytest.fixture(autouse=True)
def default_config(monkeypatch, tmp_path):
    """Isolate every test from local config files and MDCOV_* variables."""
    for key in ("MDCOV_SEED", "MDCOV_THREADS", "MDCOV_R", "MDCOV_LOG_LEVEL"):
        monkeypatch.delenv(key, raising=False)
    monkeypatch.setenv("MDCOV_CONFIG", str(tmp_path / "absent_conf.json"))
    config.load()
    yield
    config.config.clear()
    config.config.update(config.DEFAULTS)


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


@pytest.fixture(scope="session")
def fixtures():
    """Bundled fixture matrices."""
    return {
        "k23": load_matrix(fixture_path("k23.csv")),
        "cycle4": load_matrix(fixture_path("cycle4.csv")),
        "two_point": load_matrix(fixture_path("two_point.csv")),
    }


@pytest.fixture(scope="session")
def unit_pair():
    """Two points at distance 1."""
    return DistanceMatrix([[0.0, 1.0], [1.0, 0.0]])


@pytest.fixture(scope="session")
def coupled_two_point(unit_pair):
    """theta puts 1/2 on (x1, y1) and 1/2 on (x2, y2)."""
    return FiniteJointMeasure(unit_pair, unit_pair, [[0.5, 0.0], [0.0, 0.5]])


METRIC_CHOICES = (
    MetricSpec("euclidean"),
    MetricSpec("manhattan"),
    MetricSpec("chebyshev"),
    MetricSpec("minkowski", p=3),
)


def random_sample(rng, n, dependent=False, metrics=None):
    """Paired sample of n points in R^2 x R^1 under randomly chosen vector metrics."""
    x = rng.normal(size=(n, 2))
    y = x[:, :1] + 0.1 * rng.normal(size=(n, 1)) if dependent else rng.normal(size=(n, 1))
    metric_x, metric_y = metrics or (
        METRIC_CHOICES[rng.integers(len(METRIC_CHOICES))],
        METRIC_CHOICES[rng.integers(len(METRIC_CHOICES))],
    )
    return PairedSample(
        build_distance_matrix(x, metric_x), build_distance_matrix(y, metric_y)
    )


def random_probability(rng, k, dim=2):
    """Random probability measure on k distinct Euclidean points."""
    space = build_distance_matrix(rng.normal(size=(k, dim)))
    w = rng.random(k) + 0.05
    return FiniteSignedMeasure(space, w / w.sum())


def random_joint(rng, k_x, k_y):
    space_x = build_distance_matrix(rng.normal(size=(k_x, 2)))
    space_y = build_distance_matrix(rng.normal(size=(k_y, 1)))
    w = rng.random((k_x, k_y))
    return FiniteJointMeasure(space_x, space_y, w / w.sum())
