"""CART and Random Forest induction with root-variance splitting."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import _tree
from .dataset import Dataset, SchemaError
from .params import CART, RF, ParamVector

UNBOUNDED = -1


def split_score(partition: Sequence[tuple[int, float]]) -> float:
    """Sum over children of sqrt(variance) * n_i / sum(n); lower is better."""
    if len(partition) == 0:
        raise ValueError("split_score needs at least one child")
    total = 0
    for n, v in partition:
        if n < 1 or v < 0:
            raise ValueError(f"bad child (n={n}, v={v})")
        total += n
    return sum(math.sqrt(v) * n / total for n, v in partition)


@dataclass(frozen=True, eq=False)
class Tree:
    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray
    n_node: np.ndarray
    depth: np.ndarray

    @property
    def node_count(self) -> int:
        return len(self.feature)

    @property
    def is_leaf(self) -> np.ndarray:
        return self.left == _tree.LEAF

    @property
    def max_depth(self) -> int:
        return int(self.depth.max())

    @property
    def n_leaves(self) -> int:
        return int(self.is_leaf.sum())

    @property
    def leaf_sizes(self) -> np.ndarray:
        return self.n_node[self.is_leaf]

    def apply(self, X: np.ndarray) -> np.ndarray:
        return _tree.apply(X, self.feature, self.threshold, self.left, self.right, self.value)

    def to_dict(self, node: int = 0) -> dict:
        if self.left[node] == _tree.LEAF:
            return {"leaf_fraction": float(self.value[node]), "n": int(self.n_node[node])}
        return {
            "attribute": int(self.feature[node]),
            "threshold": float(self.threshold[node]),
            "left": self.to_dict(int(self.left[node])),
            "right": self.to_dict(int(self.right[node])),
        }

    def signature(self) -> tuple:
        return (
            self.feature.tobytes(),
            self.threshold.tobytes(),
            self.left.tobytes(),
            self.value.tobytes(),
        )


@dataclass(frozen=True, eq=False)
class TrainedModel:
    kind: str
    trees: tuple[Tree, ...]
    threshold: float
    seed: int
    schema: tuple[str, ...]
    params: ParamVector

    def predict_scores(self, X: np.ndarray) -> np.ndarray:
        X = np.ascontiguousarray(X, dtype=np.float64)
        if len(self.trees) == 1:
            return self.trees[0].apply(X)
        acc = np.zeros(X.shape[0])
        for t in self.trees:
            acc += t.apply(X)
        return acc / len(self.trees)

    def dump_json(self) -> str:
        return json.dumps(
            {
                "kind": self.kind,
                "threshold": self.threshold,
                "seed": self.seed,
                "schema": list(self.schema),
                "trees": [t.to_dict() for t in self.trees],
            }
        )


_MASK = 0xFFFFFFFFFFFFFFFF


def _mix(seed: int, index: int) -> int:
    # splitmix64 finalizer over (seed, index): sub-seed for tree `index`,
    # independent of how trees are scheduled
    z = (seed + (index + 1) * 0x9E3779B97F4A7C15) & _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def _grow(X, y, rows, p: ParamVector, seed: int, max_leaves: int | None) -> Tree:
    max_depth = UNBOUNDED if p.max_depth is None or p.learner_kind == RF else int(p.max_depth)
    leaves = 0 if max_leaves is None else int(max_leaves)
    arrays = _tree.grow(
        X,
        y,
        rows,
        p.n_features(X.shape[1]),
        int(p.min_sample_split),
        int(p.min_samples_leaf),
        max_depth,
        leaves,
        np.uint64(seed),
    )
    return Tree(*arrays)


def _xy(train: Dataset) -> tuple[np.ndarray, np.ndarray]:
    return np.ascontiguousarray(train.X), train.y.astype(np.float64)


def train_cart(train: Dataset, p: ParamVector, seed: int) -> TrainedModel:
    if p.learner_kind != CART:
        raise ValueError("train_cart needs CART parameters")
    X, y = _xy(train)
    rows = np.arange(len(train), dtype=np.int64)
    tree = _grow(X, y, rows, p, _mix(seed, 0), None)
    return TrainedModel(CART, (tree,), float(p.threshold), seed, train.schema, p)


def train_rf(train: Dataset, p: ParamVector, seed: int) -> TrainedModel:
    if p.learner_kind != RF:
        raise ValueError("train_rf needs RF parameters")
    X, y = _xy(train)
    n = len(train)
    trees = []
    for t in range(int(p.n_estimators)):
        sub = _mix(seed, t)
        rows = _tree.bootstrap(n, np.uint64(sub))
        trees.append(_grow(X, y, rows, p, _mix(sub, 1), p.max_leaf_nodes))
    return TrainedModel(RF, tuple(trees), float(p.threshold), seed, train.schema, p)


def train(train_ds: Dataset, p: ParamVector, seed: int) -> TrainedModel:
    return (train_cart if p.learner_kind == CART else train_rf)(train_ds, p, seed)


def predict_scores(m: TrainedModel, ds: Dataset) -> np.ndarray:
    if ds.schema != m.schema:
        raise SchemaError(f"{ds.name}: schema does not match the training schema")
    return m.predict_scores(ds.X)


def predict(m: TrainedModel, ds: Dataset) -> np.ndarray:
    """Boolean defective flags: mean leaf fraction >= threshold."""
    return predict_scores(m, ds) >= m.threshold
