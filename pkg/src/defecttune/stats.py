"""Ranking treatments: Scott-Knott clustering gated by a bootstrap test and A12."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

RESAMPLES = 1000
ALPHA = 0.05
SMALL_EFFECT = 0.56
ANALYSIS_SEED = 20170101


@dataclass(frozen=True)
class Treatment:
    name: str
    samples: tuple[float, ...]

    def __init__(self, name: str, samples: Sequence[float]):
        arr = np.asarray(samples, dtype=float)
        if arr.size == 0 or not np.all(np.isfinite(arr)):
            raise ValueError(f"{name}: samples must be non-empty and finite")
        object.__setattr__(self, "name", name)
        object.__setattr__(self, "samples", tuple(arr.tolist()))

    @property
    def median(self) -> float:
        return float(np.median(self.samples))

    @property
    def iqr(self) -> float:
        q75, q25 = np.percentile(self.samples, [75, 25])
        return float(q75 - q25)


@dataclass(frozen=True)
class RankedGroups:
    groups: tuple[tuple[str, ...], ...]  # best group first

    def rank_of(self, name: str) -> int:
        for i, g in enumerate(self.groups):
            if name in g:
                return i + 1
        raise KeyError(name)

    def __len__(self) -> int:
        return len(self.groups)


def a12(y: Sequence[float], x: Sequence[float]) -> float:
    """Vargha-Delaney A12: P(Y > X) + 0.5 P(Y == X) over all pairs."""
    y = np.asarray(y, dtype=float)
    x = np.asarray(x, dtype=float)
    if y.size == 0 or x.size == 0:
        raise ValueError("a12 needs non-empty samples")
    gt = np.count_nonzero(y[:, None] > x[None, :])
    eq = np.count_nonzero(y[:, None] == x[None, :])
    return (gt + 0.5 * eq) / (y.size * x.size)


def _t_stat(y: np.ndarray, x: np.ndarray) -> np.ndarray:
    # works on the last axis so a batch of resamples is one call
    ny, nx = y.shape[-1], x.shape[-1]
    vy = y.var(axis=-1, ddof=1) if ny > 1 else np.zeros(y.shape[:-1])
    vx = x.var(axis=-1, ddof=1) if nx > 1 else np.zeros(x.shape[:-1])
    diff = y.mean(axis=-1) - x.mean(axis=-1)
    se = np.sqrt(vy / ny + vx / nx)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(se > 0, diff / np.where(se > 0, se, 1.0), np.where(diff == 0, 0.0, np.inf))
    return np.abs(t)


def bootstrap_different(
    y: Sequence[float],
    x: Sequence[float],
    resamples: int = RESAMPLES,
    alpha: float = ALPHA,
    rng: np.random.Generator | int | None = None,
) -> bool:
    """Two-sample bootstrap test of equal means (Efron & Tibshirani, Alg. 16.2).

    Both samples are shifted to the pooled mean so the null holds, then
    resampled; the p-value is the share of resampled |t| at least as large
    as the observed one.
    """
    if resamples < 100:
        raise ValueError("use at least 100 resamples")
    y = np.asarray(y, dtype=float)
    x = np.asarray(x, dtype=float)
    observed = float(_t_stat(y, x))
    if observed == 0.0:
        return False
    if np.isinf(observed):
        return True
    rng = np.random.default_rng(ANALYSIS_SEED if rng is None else rng)
    pooled = np.concatenate([y, x]).mean()
    y0 = y - y.mean() + pooled
    x0 = x - x.mean() + pooled
    ys = y0[rng.integers(0, y.size, (resamples, y.size))]
    xs = x0[rng.integers(0, x.size, (resamples, x.size))]
    extreme = np.count_nonzero(_t_stat(ys, xs) >= observed)
    return extreme / resamples < alpha


def scott_knott(
    treatments: Sequence[Treatment],
    resamples: int = RESAMPLES,
    alpha: float = ALPHA,
    small_effect: float = SMALL_EFFECT,
    seed: int = ANALYSIS_SEED,
) -> RankedGroups:
    """Recursively bi-partition treatments (sorted best median first).

    The cut maximizing the between-group sum of squares of means is kept
    only when the two sides are bootstrap-different and the higher side
    beats the lower by at least a small A12 effect.
    """
    if not treatments:
        raise ValueError("scott_knott needs at least one treatment")
    names = [t.name for t in treatments]
    if len(set(names)) != len(names):
        raise ValueError("treatment names must be unique")
    ordered = sorted(treatments, key=lambda t: (-t.median, t.name))
    rng = np.random.default_rng(seed)
    groups: list[tuple[str, ...]] = []

    def pooled(ts) -> np.ndarray:
        return np.concatenate([np.asarray(t.samples) for t in ts])

    def recurse(ts: list[Treatment]) -> None:
        if len(ts) > 1:
            allv = pooled(ts)
            mu = allv.mean()
            best_cut, best_ss = None, -1.0
            for cut in range(1, len(ts)):
                lo, hi = pooled(ts[:cut]), pooled(ts[cut:])
                ss = lo.size * (lo.mean() - mu) ** 2 + hi.size * (hi.mean() - mu) ** 2
                if ss > best_ss + 1e-15:
                    best_cut, best_ss = cut, ss
            left, right = pooled(ts[:best_cut]), pooled(ts[best_cut:])
            high, low = (left, right) if left.mean() >= right.mean() else (right, left)
            if bootstrap_different(left, right, resamples, alpha, rng) and a12(high, low) >= small_effect:
                recurse(ts[:best_cut])
                recurse(ts[best_cut:])
                return
        groups.append(tuple(t.name for t in ts))

    recurse(ordered)
    return RankedGroups(tuple(groups))
