"""Correlation-dimension estimate of intrinsic dimensionality (Grassberger-Procaccia)."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import pdist

from .dataset import Dataset, minmax

N_RADII = 20
UPPER_FRACTION = 0.25  # largest radius = r_max / 4
LOWER_FRACTION = 1e-3  # smallest radius >= r_max / 1000
MIN_POINTS = 20


class EstimationError(ValueError):
    pass


@dataclass(frozen=True)
class CorrelationCurve:
    radii: np.ndarray
    c_values: np.ndarray
    k: int


@dataclass(frozen=True)
class DimEstimate:
    dataset_name: str
    m: float
    n: int
    points_used: int
    r_window: tuple[float, float]
    curve: CorrelationCurve


def correlation_sum(points, r: float) -> float:
    """Fraction of point pairs closer than ``r`` (Euclidean, strict)."""
    points = np.asarray(points, dtype=float)
    k = points.shape[0]
    if k < 2:
        raise EstimationError("correlation sum needs at least two points")
    d = pdist(points)
    return 2.0 * np.count_nonzero(d < r) / (k * (k - 1))


def correlation_curve(points, radii) -> CorrelationCurve:
    points = np.asarray(points, dtype=float)
    k = points.shape[0]
    if k < 2:
        raise EstimationError("correlation sum needs at least two points")
    d = np.sort(pdist(points))
    radii = np.asarray(radii, dtype=float)
    counts = np.searchsorted(d, radii, side="left")
    return CorrelationCurve(radii, 2.0 * counts / (k * (k - 1)), k)


def estimate_points(
    points,
    name: str = "",
    n_radii: int = N_RADII,
    upper_fraction: float = UPPER_FRACTION,
    lower_fraction: float = LOWER_FRACTION,
    normalize: bool = True,
) -> DimEstimate:
    """Least-squares slope of ln C(r) on ln r over a log-spaced radius window."""
    X = np.asarray(points, dtype=float)
    if X.shape[0] < MIN_POINTS:
        raise EstimationError(f"{name}: need at least {MIN_POINTS} points, got {X.shape[0]}")
    if normalize:
        X = minmax(X)
    d = pdist(X)
    nonzero = d[d > 0]
    if nonzero.size == 0:
        raise EstimationError(f"{name}: all points coincide")
    r_max = float(d.max())
    r_lo = max(float(nonzero.min()), r_max * lower_fraction)
    r_hi = r_max * upper_fraction
    if not r_lo < r_hi:
        raise EstimationError(f"{name}: empty radius window [{r_lo}, {r_hi}]")
    radii = np.geomspace(r_lo, r_hi, n_radii)
    curve = correlation_curve(X, radii)
    use = curve.c_values > 0
    if np.count_nonzero(use) < 3:
        raise EstimationError(f"{name}: fewer than 3 radii with non-zero C(r)")
    slope = np.polyfit(np.log(radii[use]), np.log(curve.c_values[use]), 1)[0]
    return DimEstimate(name, float(slope), X.shape[1], X.shape[0], (r_lo, r_hi), curve)


def estimate_dimension(ds: Dataset, **kwargs) -> DimEstimate:
    return estimate_points(ds.X, ds.name, **kwargs)
