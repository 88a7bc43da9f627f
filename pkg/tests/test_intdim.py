import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from defecttune.dataset import METRICS, Dataset, load_bundled
from defecttune.intdim import (
    EstimationError,
    correlation_curve,
    correlation_sum,
    estimate_dimension,
    estimate_points,
)


def _embed(latent, n=20, seed=0):
    """Put a k-D uniform cloud into the first k of n coordinates; the rest are constant."""
    rng = np.random.default_rng(seed)
    X = np.full((latent.shape[0], n), 0.5)
    X[:, : latent.shape[1]] = latent
    return X[:, rng.permutation(n)]


def test_correlation_sum_examples():
    assert correlation_sum([[0, 0], [0.5, 0]], 1.0) == 1.0
    pts = [[0, 0], [1, 0], [0, 3]]
    assert correlation_sum(pts, 0.5) == 0.0
    assert correlation_sum(pts, 1.0) == 0.0  # strict
    assert correlation_sum(pts, 1.01) == pytest.approx(1 / 3)
    with pytest.raises(EstimationError):
        correlation_sum([[1, 2]], 1.0)


def test_correlation_sum_matches_pair_enumeration():
    rng = np.random.default_rng(9)
    for _ in range(50):
        pts = rng.random((10, 3))
        r = rng.uniform(0, 1.5)
        inside = sum(np.linalg.norm(a - b) < r for a, b in itertools.combinations(pts, 2))
        assert correlation_sum(pts, r) == pytest.approx(2 * inside / (10 * 9))
        curve = correlation_curve(pts, [r])
        assert curve.c_values[0] == pytest.approx(correlation_sum(pts, r))


@settings(max_examples=30)
@given(st.integers(2, 30), st.integers(0, 10_000))
def test_curve_monotone_and_saturates(k, seed):
    pts = np.random.default_rng(seed).random((k, 4))
    radii = np.linspace(0.01, 2.0, 25)
    c = correlation_curve(pts, radii).c_values
    assert np.all(np.diff(c) >= 0)
    r_max = max(np.linalg.norm(a - b) for a, b in itertools.combinations(pts, 2))
    assert correlation_sum(pts, r_max + 1e-9) == 1.0


def test_duplicates_count_at_every_radius():
    pts = [[0, 0], [0, 0], [5, 5]]
    assert correlation_sum(pts, 1e-12) == pytest.approx(1 / 3)


@pytest.mark.parametrize("seed", range(5))
def test_segment_is_one_dimensional(seed):
    rng = np.random.default_rng(seed)
    est = estimate_points(_embed(rng.random((200, 1)), seed=seed))
    assert est.m == pytest.approx(1.0, abs=0.2)
    assert est.n == 20 and est.points_used == 200


@pytest.mark.parametrize("seed", range(5))
def test_square_is_two_dimensional(seed):
    rng = np.random.default_rng(100 + seed)
    est = estimate_points(_embed(rng.random((200, 2)), seed=seed))
    assert est.m == pytest.approx(2.0, abs=0.3)


def test_invariances():
    rng = np.random.default_rng(4)
    X = _embed(rng.random((150, 3)))
    ds = Dataset("x", X, np.zeros(150, int), None, METRICS)
    base = estimate_dimension(ds).m
    assert estimate_points(X[rng.permutation(150)]).m == pytest.approx(base, abs=1e-9)
    assert estimate_points(X[:, rng.permutation(20)]).m == pytest.approx(base, abs=1e-9)
    assert estimate_points(X * 37.5).m == pytest.approx(base, abs=1e-9)


def test_estimation_errors():
    with pytest.raises(EstimationError):
        estimate_points(np.random.default_rng(0).random((10, 3)))
    with pytest.raises(EstimationError):
        estimate_points(np.ones((30, 3)))
    # two clusters far apart: no pair lies in the radius window
    X = np.vstack([np.zeros((20, 2)), np.ones((20, 2))])
    with pytest.raises(EstimationError):
        estimate_points(X)


def test_bundled_release_estimate_in_range():
    ds = load_bundled().triplet("ivy").train
    est = estimate_dimension(ds)
    assert 0 <= est.m <= est.n
    lo, hi = est.r_window
    assert 0 < lo < hi
    assert len(est.curve.radii) == 20
