import numpy as np
import pytest

from metric_dcov import config
from metric_dcov.errors import InputError, PreconditionError
from metric_dcov.estimators import PairedSample, dcov_v, dvar_v
from metric_dcov.inference import (
    permutation_distribution,
    permutation_test,
    replication_rng,
    spectral_null,
    spectral_test,
    sum_lambda_diagnostic,
)
from metric_dcov.metric_core import DistanceMatrix, MetricSpec, build_distance_matrix

from .conftest import random_sample

EUCLIDEAN = (MetricSpec(), MetricSpec())


def euclidean_sample(rng, n, dependent=False):
    return random_sample(rng, n, dependent=dependent, metrics=EUCLIDEAN)


def test_constant_y_gives_p_one(rng):
    x = build_distance_matrix(rng.normal(size=(15, 2)))
    s = PairedSample(x, DistanceMatrix(np.zeros((15, 15))))
    for stat in ("dcov_v", "dcov_u", "dcor_v", "dcor_u"):
        result = permutation_test(s, stat, replications=49, seed=1)
        assert result.observed == 0
        assert result.p_value == 1


def test_deterministic_across_threads(rng):
    s = euclidean_sample(rng, 8)
    observed, baseline = permutation_distribution(
        s, replications=99, seed=42, threads=1
    )
    for threads in (2, 3, 8, 200):
        again, replicates = permutation_distribution(
            s, replications=99, seed=42, threads=threads
        )
        assert again == observed
        np.testing.assert_array_equal(replicates, baseline)
    p_values = {
        permutation_test(s, replications=99, seed=42, threads=t).p_value
        for t in (1, 4)
    }
    assert len(p_values) == 1


def test_seed_changes_replicates(rng):
    s = euclidean_sample(rng, 10)
    _, first = permutation_distribution(s, replications=20, seed=1)
    _, second = permutation_distribution(s, replications=20, seed=2)
    assert not np.array_equal(first, second)


def test_replication_streams_are_independent_of_order():
    a = replication_rng(9, 5).permutation(12)
    replication_rng(9, 4).permutation(12)
    np.testing.assert_array_equal(a, replication_rng(9, 5).permutation(12))


def test_identical_variables_are_detected(rng):
    x = build_distance_matrix(rng.normal(size=(30, 1)))
    result = permutation_test(PairedSample(x, x), replications=199, seed=3)
    assert result.observed == pytest.approx(dvar_v(x), abs=1e-12)
    assert result.p_value <= 0.02


def test_joint_relabeling_keeps_observed(rng):
    s = euclidean_sample(rng, 12)
    perm = rng.permutation(12)
    result = permutation_test(s, replications=19, seed=0)
    relabeled = permutation_test(s.permuted(perm), replications=19, seed=0)
    assert relabeled.observed == pytest.approx(result.observed, abs=1e-12)


def test_p_value_bounds(rng):
    result = permutation_test(euclidean_sample(rng, 10), replications=9, seed=5)
    assert 1 / 10 <= result.p_value <= 1
    assert (result.p_value * 10) == pytest.approx(round(result.p_value * 10))


def test_permutation_preconditions(rng):
    s = euclidean_sample(rng, 5)
    with pytest.raises(PreconditionError, match="replications"):
        permutation_test(s, replications=0, seed=1)
    with pytest.raises(PreconditionError, match="n >= 6"):
        permutation_test(s, "dcov_u", replications=9, seed=1)
    with pytest.raises(PreconditionError, match="threads"):
        permutation_test(s, replications=9, seed=1, threads=0)
    with pytest.raises(InputError, match="Unknown statistic"):
        permutation_test(s, "hsic", replications=9, seed=1)
    with pytest.raises(PreconditionError, match="n >= 2"):
        single = DistanceMatrix([[0.0]])
        permutation_test(PairedSample(single, single), replications=9, seed=1)


@pytest.mark.parametrize("seed", [-1, 2**64, 1.5, True])
def test_seed_range(rng, seed):
    with pytest.raises(PreconditionError, match="Seed"):
        permutation_test(euclidean_sample(rng, 6), replications=9, seed=seed)


def test_largest_seed_is_accepted(rng):
    result = permutation_test(euclidean_sample(rng, 6), replications=9, seed=2**64 - 1)
    assert result.seed == 2**64 - 1


def test_defaults_come_from_config(rng):
    s = euclidean_sample(rng, 7)
    config.config.update({"replications": 19, "seed": 11})
    result = permutation_test(s)
    assert result.replications == 19
    assert result.seed == 11
    assert result.p_value == permutation_test(s, replications=19, seed=11).p_value


def test_result_to_dict(rng):
    result = permutation_test(euclidean_sample(rng, 8), replications=9, seed=4)
    payload = result.to_dict()
    assert set(payload) == {
        "statistic",
        "observed",
        "p_value",
        "R",
        "seed",
        "method",
        "n",
        "rng",
    }
    assert payload["method"] == "permutation"
    assert payload["rng"]["algorithm"].startswith("PCG64")


def test_spectral_null_constant_x(rng):
    y = build_distance_matrix(rng.normal(size=(10, 1)))
    s = PairedSample(DistanceMatrix(np.zeros((10, 10))), y)
    null = spectral_null(s, n_draws=50, seed=2)
    np.testing.assert_allclose(null.lambdas, 0, atol=1e-15)
    assert null.offset == 0
    np.testing.assert_allclose(null.draws, null.offset, atol=1e-15)


def test_spectral_trace_identity(rng):
    for _ in range(10):
        s = euclidean_sample(rng, rng.integers(2, 40))
        null = spectral_null(s, n_draws=10, seed=0)
        diagnostic = sum_lambda_diagnostic(s)
        scale = max(1.0, abs(diagnostic.lambda_sum))
        expected = pytest.approx(diagnostic.lambda_sum, abs=1e-8 * scale)
        assert null.lambdas.sum() == expected


def test_spectral_draw_mean(rng):
    s = euclidean_sample(rng, 25)
    null = spectral_null(s, n_draws=4000, seed=8)
    standard_error = null.draws.std(ddof=1) / np.sqrt(len(null.draws))
    assert abs(null.draws.mean() - null.offset) <= 4 * standard_error
    assert null.offset == pytest.approx(s.dx.d.mean() * s.dy.d.mean())


def test_spectral_u_form_has_no_offset(rng):
    null = spectral_null(euclidean_sample(rng, 12), n_draws=10, seed=1, form="u")
    assert null.offset == 0
    assert null.form == "u"
    with pytest.raises(PreconditionError, match="Spectral form"):
        spectral_null(euclidean_sample(rng, 12), n_draws=10, seed=1, form="w")


def test_spectral_test(rng):
    s = euclidean_sample(rng, 30)
    result = spectral_test(s, n_draws=500, seed=3)
    assert result.method == "spectral"
    assert result.replications == 500
    assert result.observed == pytest.approx(dcov_v(s), abs=1e-15)
    assert 0 < result.p_value <= 1
    with pytest.raises(PreconditionError, match="Spectral test supports"):
        spectral_test(s, "dcor_v", n_draws=10, seed=3)


def test_spectral_is_reproducible(rng):
    s = euclidean_sample(rng, 15)
    first = spectral_null(s, n_draws=100, seed=6).draws
    np.testing.assert_array_equal(first, spectral_null(s, n_draws=100, seed=6).draws)


def test_sum_lambda_constant_x(rng):
    y = build_distance_matrix(rng.normal(size=(9, 2)))
    constant = DistanceMatrix(np.zeros((9, 9)))
    diagnostic = sum_lambda_diagnostic(PairedSample(constant, y))
    assert diagnostic.lambda_sum == 0
    assert diagnostic.offset == 0
    assert diagnostic.relative_gap == 0


def test_sum_lambda_on_k23_is_reported(fixtures):
    k23 = fixtures["k23"]
    diagnostic = sum_lambda_diagnostic(PairedSample(k23, k23))
    assert np.isfinite(diagnostic.relative_gap)
    assert set(diagnostic.to_dict()) == {"lambda_sum", "offset", "relative_gap"}


@pytest.mark.slow
def test_permutation_size():
    rng = np.random.default_rng(101)
    rejections = [
        permutation_test(euclidean_sample(rng, 40), replications=199, seed=r).p_value
        <= 0.05
        for r in range(500)
    ]
    assert 0.03 <= np.mean(rejections) <= 0.07


@pytest.mark.slow
def test_permutation_power():
    rng = np.random.default_rng(102)
    rejections = []
    for r in range(200):
        x = rng.normal(size=(40, 1))
        y = x + 0.1 * rng.normal(size=(40, 1))
        s = PairedSample.from_points(x, y)
        rejections.append(permutation_test(s, replications=199, seed=r).p_value <= 0.05)
    assert np.mean(rejections) >= 0.95


@pytest.mark.slow
def test_spectral_quantile_matches_permutation():
    rng = np.random.default_rng(103)
    s = euclidean_sample(rng, 200)
    _, replicates = permutation_distribution(s, replications=999, seed=1, threads=4)
    permutation_quantile = np.quantile(s.n * replicates, 0.95)
    draws = spectral_null(s, n_draws=4000, seed=1).draws
    spectral_quantile = np.quantile(draws, 0.95)
    assert spectral_quantile == pytest.approx(permutation_quantile, rel=0.15)


@pytest.mark.slow
def test_sum_lambda_gap_shrinks():
    rng = np.random.default_rng(104)

    def median_gap(n):
        return np.median(
            [
                sum_lambda_diagnostic(euclidean_sample(rng, n)).relative_gap
                for _ in range(20)
            ]
        )

    assert median_gap(500) < median_gap(100)
