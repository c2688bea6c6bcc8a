import numpy as np
import pytest

from polymatrix import GameClass, SamplerConfig, mc_unique_fraction, sample_game
from polymatrix.sampling import free_pairs


def test_same_seed_and_index_give_identical_games():
    config = SamplerConfig("general", (2, 1, 2), seed=123, samples=10)
    a, b = sample_game(config, 7), sample_game(config, 7)
    assert np.array_equal(a.matrix, b.matrix)
    assert not np.array_equal(a.matrix, sample_game(config, 6).matrix)


def test_stream_ignores_sample_count():
    small = SamplerConfig("zero-sum", (2, 2), seed=5, samples=3)
    large = SamplerConfig("zero-sum", (2, 2), seed=5, samples=3000)
    assert np.array_equal(sample_game(small, 2).matrix, sample_game(large, 2).matrix)


def test_zero_sum_samples_are_exactly_skew():
    config = SamplerConfig("zero-sum", (1, 2, 3), seed=0, samples=50)
    for index in range(config.samples):
        A = sample_game(config, index).matrix
        assert np.array_equal(A, -A.T)


def test_free_pairs():
    assert free_pairs(GameClass.COORDINATION, 3) == [(0, 1), (0, 2), (1, 2)]
    assert len(free_pairs(GameClass.GENERAL, 3)) == 6


def test_gaussian_marginals():
    n, scale = 10_000, 2.5
    config = SamplerConfig("general", (1, 1), scale=scale, seed=77, samples=n)
    draws = np.array([[sample_game(config, k).matrix[0, 1], sample_game(config, k).matrix[1, 0]]
                      for k in range(n)])
    assert np.all(np.abs(draws.mean(axis=0)) <= 4 * scale / np.sqrt(n))
    # variance of a sample variance is 2 sigma^4 / (n - 1)
    assert np.all(np.abs(draws.var(axis=0, ddof=1) - scale**2) <= 4 * scale**2 * np.sqrt(2 / (n - 1)))
    assert abs(np.corrcoef(draws.T)[0, 1]) <= 4 / np.sqrt(n)


def test_index_bounds():
    config = SamplerConfig("general", (1, 1), samples=2)
    with pytest.raises(IndexError):
        sample_game(config, 2)


@pytest.mark.parametrize("kwargs", [dict(scale=0.0), dict(samples=0), dict(seed=-1)])
def test_config_validation(kwargs):
    with pytest.raises(ValueError):
        SamplerConfig("general", (1, 1), **kwargs)


@pytest.mark.parametrize("cls, dims, fraction", [
    ("zero-sum", (1, 1, 1), 0.0),
    ("general", (3, 1, 1), 0.0),
    ("coordination", (2, 2, 2), 1.0),
    ("zero-sum", (1, 1, 1, 1), 1.0),
    ("coordination", (3, 2, 2), 1.0),
    ("general", (2, 1), 0.0),
    ("coordination", (1, 3), 0.0),
])
def test_dichotomy(cls, dims, fraction):
    report = mc_unique_fraction(SamplerConfig(cls, dims, seed=2, samples=1000))
    assert report.unique_fraction == fraction
    assert report.unique_count == round(fraction * 1000)
    assert sum(report.rank_histogram.values()) == 1000


def test_zero_sum_even_determinant_nonnegative():
    for dims in [(1, 1, 1, 1), (2, 2, 2), (3, 1, 2)]:
        report = mc_unique_fraction(SamplerConfig("zero-sum", dims, seed=4, samples=300))
        assert set(report.det_sign_counts) <= {0, 1}


def test_report_is_reproducible_and_worker_independent():
    config = SamplerConfig("zero-sum", (2, 2, 1), seed=31, samples=400, gaussian_costs=True)
    serial = mc_unique_fraction(config)
    again = mc_unique_fraction(config)
    pooled = mc_unique_fraction(config, workers=3, chunk=37)
    assert serial.to_dict() == again.to_dict() == pooled.to_dict()
    # Gaussian costs with a singular skew A are almost never consistent
    assert serial.verdict_counts == {"NoEquilibrium": 400}


def test_report_fields():
    report = mc_unique_fraction(SamplerConfig("coordination", (2, 2, 2), seed=0, samples=200))
    assert report.min_sv_min <= report.min_sv_median <= report.min_sv_max
    assert report.min_sv_over_tol_min > 1e3
    assert report.rank_histogram == {6: 200}
    assert report.csv_row()[:3] == ("coordination", "2,2,2", 200)
