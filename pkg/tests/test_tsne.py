"""2-D embedding: affinity construction, descent behavior, determinism."""

import math

import numpy as np
import pytest

from werprobe.analysis.metrics import silhouette_score
from werprobe.analysis.tsne import TsneConfig, conditional_probabilities, tsne_project
from werprobe.errors import ConfigError, ShapeError


def two_blobs(n_per, gap, seed=0, dim=5):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(n_per, dim)) + gap
    b = rng.normal(size=(n_per, dim)) - gap
    return np.vstack([a, b]), [0] * n_per + [1] * n_per


class TestConditionalProbabilities:
    def test_rows_sum_to_one(self):
        rng = np.random.default_rng(3)
        x = rng.normal(size=(40, 8))
        p = conditional_probabilities(x, perplexity=10.0)
        np.testing.assert_allclose(p.sum(axis=1), 1.0, atol=1e-6)

    def test_diagonal_is_zero(self):
        rng = np.random.default_rng(4)
        p = conditional_probabilities(rng.normal(size=(12, 3)), perplexity=4.0)
        assert np.all(np.diag(p) == 0.0)

    def test_entropy_matches_target_perplexity(self):
        rng = np.random.default_rng(5)
        p = conditional_probabilities(rng.normal(size=(30, 4)), perplexity=8.0)
        live = p > 0
        for i in range(30):
            row = p[i][live[i]]
            h = -(row * np.log(row)).sum()
            assert math.isclose(h, math.log(8.0), abs_tol=2e-5)

    def test_nearer_points_get_more_mass(self):
        x = np.array([[0.0], [0.5], [6.0], [6.4]])
        p = conditional_probabilities(x, perplexity=2.0)
        assert p[0, 1] > p[0, 2]
        assert p[3, 2] > p[3, 0]

    def test_perplexity_must_be_below_n(self):
        with pytest.raises(ConfigError):
            conditional_probabilities(np.zeros((5, 2)), perplexity=5.0)

    def test_rank_validation(self):
        with pytest.raises(ShapeError):
            conditional_probabilities(np.zeros(5), perplexity=2.0)


class TestProjection:
    def test_kl_decreases_over_full_schedule(self):
        rng = np.random.default_rng(9)
        x = rng.normal(size=(50, 10))
        result = tsne_project(x, TsneConfig(perplexity=10.0, seed=1))
        assert result.final_kl < result.initial_kl
        assert math.isfinite(result.final_kl)
        assert result.coordinates.shape == (50, 2)

    def test_separated_blobs_stay_separated(self):
        x, labels = two_blobs(40, gap=12.0, seed=2)
        result = tsne_project(x, TsneConfig(perplexity=15.0, seed=3))
        assert silhouette_score(result.coordinates, labels) > 0.5

    def test_deterministic_given_seed(self):
        rng = np.random.default_rng(11)
        x = rng.normal(size=(20, 6))
        cfg = TsneConfig(perplexity=6.0, iterations=300, seed=42)
        r1 = tsne_project(x, cfg)
        r2 = tsne_project(x, cfg)
        np.testing.assert_array_equal(r1.coordinates, r2.coordinates)
        assert r1.final_kl == r2.final_kl

    def test_seed_changes_layout(self):
        rng = np.random.default_rng(12)
        x = rng.normal(size=(20, 6))
        r1 = tsne_project(x, TsneConfig(perplexity=6.0, iterations=120, seed=0))
        r2 = tsne_project(x, TsneConfig(perplexity=6.0, iterations=120, seed=1))
        assert not np.array_equal(r1.coordinates, r2.coordinates)

    def test_perplexity_capped_for_small_inputs(self):
        rng = np.random.default_rng(13)
        x = rng.normal(size=(10, 3))
        result = tsne_project(x, TsneConfig(perplexity=30.0, iterations=60, seed=0))
        assert result.effective_perplexity == 3.0  # (10 - 1) / 3

    def test_too_few_points(self):
        with pytest.raises(ConfigError):
            tsne_project(np.zeros((3, 2)))

    def test_config_validation(self):
        with pytest.raises(ConfigError):
            TsneConfig(iterations=0)
        with pytest.raises(ConfigError):
            TsneConfig(perplexity=0.0)
