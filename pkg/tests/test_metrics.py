"""Rank-correlation, confusion, combination, and clustering metrics."""

import math

import numpy as np
import pytest

from werprobe.analysis import metrics as M
from werprobe.errors import (
    AlignmentError,
    ConfigError,
    EmptyBatchError,
    LabelError,
    NumericError,
)


def brute_force_tau_b(x, y):
    """Literal O(n^2) pair loop over plain floats, including tie handling."""
    n = len(x)
    concordant = discordant = ties_x = ties_y = 0
    for i in range(n):
        for j in range(i + 1, n):
            dx = x[i] - x[j]
            dy = y[i] - y[j]
            if dx == 0 and dy == 0:
                continue
            if dx == 0:
                ties_x += 1
            elif dy == 0:
                ties_y += 1
            elif (dx > 0) == (dy > 0):
                concordant += 1
            else:
                discordant += 1
    nx = concordant + discordant + ties_x
    ny = concordant + discordant + ties_y
    if nx == 0 or ny == 0:
        raise ZeroDivisionError("all pairs tied on one side")
    return (concordant - discordant) / math.sqrt(nx * ny)


class TestKendall:
    def test_hand_case_with_ties(self):
        # C=5, D=0, one tie on x: tau-b = 5 / sqrt(6 * 5)
        tau = M.kendall_tau([1, 2, 2, 3], [1, 3, 2, 4])
        assert math.isclose(tau, 0.9128709291752769, rel_tol=1e-12)

    def test_perfect_and_reversed(self):
        assert math.isclose(M.kendall_tau([1, 2, 3], [10, 20, 30]), 1.0)
        assert math.isclose(M.kendall_tau([1, 2, 3], [30, 20, 10]), -1.0)

    def test_matches_brute_force_on_tied_vectors(self):
        rng = np.random.default_rng(7)
        for trial in range(100):
            n = int(rng.integers(5, 40))
            # coarse grids force plenty of ties
            x = rng.integers(0, 6, size=n).astype(float)
            y = (x + rng.integers(-2, 3, size=n)).astype(float)
            try:
                expected = brute_force_tau_b(list(x), list(y))
            except ZeroDivisionError:
                with pytest.raises(NumericError):
                    M.kendall_tau(x, y)
                continue
            got = M.kendall_tau(x, y)
            assert math.isclose(got, expected, rel_tol=1e-12, abs_tol=1e-12), trial

    def test_all_tied_raises(self):
        with pytest.raises(NumericError):
            M.kendall_tau([1.0, 1.0, 1.0], [1.0, 2.0, 3.0])

    def test_length_validation(self):
        with pytest.raises(ConfigError):
            M.kendall_tau([1.0], [1.0, 2.0])
        with pytest.raises(ConfigError):
            M.kendall_tau([1.0], [1.0])


class TestMae:
    def test_exact_mean(self):
        assert M.mae([1.0, 2.0, 3.0], [2.0, 2.0, 5.0]) == 1.0

    def test_scalar_loop_agreement(self):
        rng = np.random.default_rng(1)
        a = rng.uniform(0, 100, 50)
        b = rng.uniform(0, 100, 50)
        loop = sum(abs(float(x) - float(y)) for x, y in zip(a, b)) / 50
        assert abs(M.mae(a, b) - loop) < 1e-9

    def test_empty(self):
        with pytest.raises(EmptyBatchError):
            M.mae([], [])


class TestConfusion:
    def test_rows_sum_to_true_counts(self):
        truth = ["a", "a", "b", "b", "b", "c"]
        pred = ["a", "b", "b", "b", "c", "c"]
        cm = M.confusion_matrix(truth, pred, labels=("a", "b", "c"))
        assert cm.counts.sum(axis=1).tolist() == [2, 3, 1]
        assert cm.total == 6
        assert math.isclose(cm.accuracy(), 4 / 6)

    def test_row_normalized(self):
        cm = M.confusion_matrix(["a", "a", "b"], ["a", "b", "b"], labels=("a", "b"))
        rows = cm.row_normalized()
        np.testing.assert_allclose(rows, [[0.5, 0.5], [0.0, 1.0]])

    def test_unknown_label_strict(self):
        with pytest.raises(LabelError):
            M.confusion_matrix(["a"], ["z"], labels=("a", "b"))

    def test_duplicate_labels(self):
        with pytest.raises(LabelError):
            M.confusion_matrix(["a"], ["a"], labels=("a", "a"))

    def test_csv_round_shape(self):
        cm = M.confusion_matrix(["a", "b"], ["a", "b"], labels=("a", "b"))
        lines = cm.to_csv().strip().split("\n")
        assert lines[0] == "true\\pred,a,b"
        assert len(lines) == 3


class TestCombine:
    def test_exact_mean(self):
        combined = M.combine_predictions([
            {"u1": 10.0, "u2": 20.0},
            {"u1": 20.0, "u2": 40.0},
            {"u1": 30.0, "u2": 60.0},
        ])
        assert combined == {"u1": 20.0, "u2": 40.0}

    def test_identity_for_single_system(self):
        preds = {"u1": 11.5, "u2": 3.25}
        assert M.combine_predictions([preds]) == preds

    def test_alignment_error_names_the_id(self):
        with pytest.raises(AlignmentError) as err:
            M.combine_predictions([{"u1": 1.0, "u2": 2.0}, {"u1": 1.0, "u3": 9.9}])
        msg = str(err.value)
        assert "u2" in msg or "u3" in msg

    def test_empty_input(self):
        with pytest.raises(EmptyBatchError):
            M.combine_predictions([])


class DummyUtt:
    def __init__(self, duration):
        self.duration = duration


class TestDurationBucket:
    def test_half_open_bounds(self):
        utts = [DummyUtt(d) for d in (3.9, 4.0, 4.5, 5.0, 5.1)]
        picked = M.duration_bucket(utts, 4.0, 5.0)
        assert [u.duration for u in picked] == [4.0, 4.5]

    def test_bad_bounds(self):
        with pytest.raises(ConfigError):
            M.duration_bucket([], 5.0, 4.0)


class TestSilhouette:
    def test_two_separated_blobs_score_high(self):
        rng = np.random.default_rng(0)
        a = rng.normal(size=(30, 2)) + 10.0
        b = rng.normal(size=(30, 2)) - 10.0
        score = M.silhouette_score(np.vstack([a, b]), [0] * 30 + [1] * 30)
        assert score > 0.8

    def test_hand_case(self):
        # two points per cluster; distances worked out by hand:
        # outer points (0, 11): a=1, b=(10+11)/2 -> s=9.5/10.5
        # inner points (1, 10): a=1, b=(9+10)/2  -> s=8.5/9.5
        x = np.array([[0.0], [1.0], [10.0], [11.0]])
        labels = [0, 0, 1, 1]
        expected = (9.5 / 10.5 + 8.5 / 9.5) / 2
        score = M.silhouette_score(x, labels)
        assert math.isclose(score, expected, rel_tol=1e-12)

    def test_one_cluster_invalid(self):
        with pytest.raises(ConfigError):
            M.silhouette_score(np.zeros((3, 2)), [0, 0, 0])

    def test_singleton_cluster_scores_zero(self):
        x = np.array([[0.0], [0.5], [9.0]])
        score = M.silhouette_score(x, [0, 0, 1])
        # singleton contributes 0; the others are strongly matched
        assert 0.0 < score < 1.0
