"""Learner hyperparameters and the spaces the tuners search."""
from __future__ import annotations

import itertools
import math
from dataclasses import asdict, dataclass, replace
from typing import Any, Iterator, Literal

import numpy as np

CART = "CART"
RF = "RF"
LEARNERS = (CART, RF)


@dataclass(frozen=True)
class ParamVector:
    """One concrete learner configuration.

    ``None`` in ``max_feature``, ``max_depth`` or ``max_leaf_nodes`` is the
    untuned default ("all attributes" / "unbounded"), kept distinct from any
    value a tuner can produce.
    """

    learner_kind: str
    threshold: float = 0.5
    max_feature: float | None = None
    min_sample_split: int = 2
    min_samples_leaf: int = 1
    max_depth: int | None = None
    max_leaf_nodes: int | None = None
    n_estimators: int = 100

    def __post_init__(self):
        if self.learner_kind not in LEARNERS:
            raise ValueError(f"unknown learner {self.learner_kind!r}")
        space = space_for(self.learner_kind)
        for dim in space.dimensions:
            v = getattr(self, dim.name)
            if v is None:
                continue
            if dim.kind == "integer" and int(v) != v:
                raise ValueError(f"{dim.name} must be an integer, got {v!r}")
            if not dim.lo <= v <= dim.hi:
                raise ValueError(f"{dim.name}={v!r} outside [{dim.lo}, {dim.hi}]")

    @classmethod
    def default(cls, learner_kind: str) -> "ParamVector":
        return cls(learner_kind)

    def n_features(self, total: int) -> int:
        if self.max_feature is None:
            return total
        return max(1, min(total, math.ceil(self.max_feature * total - 1e-9)))

    def as_dict(self) -> dict[str, Any]:
        """The parameters this learner actually uses."""
        d = asdict(self)
        keep = ["learner_kind"] + [dim.name for dim in space_for(self.learner_kind).dimensions]
        return {k: d[k] for k in keep}

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "ParamVector":
        return cls(**d)


@dataclass(frozen=True)
class Dimension:
    name: str
    kind: Literal["real", "integer"]
    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError(f"{self.name}: empty range [{self.lo}, {self.hi}]")
        if self.kind not in ("real", "integer"):
            raise ValueError(f"{self.name}: unknown kind {self.kind!r}")

    def snap(self, x: float) -> float | int:
        x = min(max(float(x), self.lo), self.hi)
        if self.kind == "integer":
            return int(round_half_up(x))
        return x


def round_half_up(x: float) -> float:
    """Round to nearest, halves away from zero (unlike Python's banker's round)."""
    return math.copysign(math.floor(abs(x) + 0.5), x)


@dataclass(frozen=True)
class ParamSpace:
    dimensions: tuple[Dimension, ...]
    learner_kind: str | None = None

    def __post_init__(self):
        names = [d.name for d in self.dimensions]
        if len(set(names)) != len(names):
            raise ValueError("dimension names must be unique")

    def __len__(self) -> int:
        return len(self.dimensions)

    def __iter__(self) -> Iterator[Dimension]:
        return iter(self.dimensions)

    @property
    def names(self) -> list[str]:
        return [d.name for d in self.dimensions]

    @property
    def lower(self) -> np.ndarray:
        return np.array([d.lo for d in self.dimensions], dtype=float)

    @property
    def upper(self) -> np.ndarray:
        return np.array([d.hi for d in self.dimensions], dtype=float)

    def clip(self, values: np.ndarray) -> np.ndarray:
        return np.clip(np.asarray(values, dtype=float), self.lower, self.upper)

    def snap(self, values) -> list:
        return [d.snap(v) for d, v in zip(self.dimensions, values)]

    def decode(self, values) -> ParamVector | dict[str, float | int]:
        """Clip, round integer dimensions, and build the configuration."""
        named = dict(zip(self.names, self.snap(values)))
        if self.learner_kind is None:
            return named
        return ParamVector(self.learner_kind, **named)

    def encode(self, p: ParamVector) -> np.ndarray:
        return np.array([float(getattr(p, n)) for n in self.names])

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        """A uniform in-bounds point (integers drawn uniformly over their values)."""
        out = np.empty(len(self))
        for i, d in enumerate(self.dimensions):
            if d.kind == "integer":
                out[i] = rng.integers(int(d.lo), int(d.hi) + 1)
            else:
                out[i] = rng.uniform(d.lo, d.hi)
        return out

    def grid_axis(self, d: Dimension, bins: int = 5) -> list[float | int]:
        raw = np.linspace(d.lo, d.hi, bins)
        if d.kind == "real":
            return [float(v) for v in raw]
        out: list[int] = []
        for v in raw:
            iv = int(round_half_up(v))
            if iv not in out:
                out.append(iv)
        return out

    def grid(self, bins: int = 5) -> list[tuple]:
        axes = [self.grid_axis(d, bins) for d in self.dimensions]
        return list(itertools.product(*axes))


CART_SPACE = ParamSpace(
    (
        Dimension("threshold", "real", 0.0, 1.0),
        Dimension("max_feature", "real", 0.01, 1.0),
        Dimension("min_sample_split", "integer", 2, 20),
        Dimension("min_samples_leaf", "integer", 1, 20),
        Dimension("max_depth", "integer", 1, 50),
    ),
    CART,
)

RF_SPACE = ParamSpace(
    (
        Dimension("threshold", "real", 0.01, 1.0),
        Dimension("max_feature", "real", 0.01, 1.0),
        Dimension("max_leaf_nodes", "integer", 1, 50),
        Dimension("min_sample_split", "integer", 2, 20),
        Dimension("min_samples_leaf", "integer", 1, 20),
        Dimension("n_estimators", "integer", 50, 150),
    ),
    RF,
)


def space_for(learner_kind: str) -> ParamSpace:
    if learner_kind == CART:
        return CART_SPACE
    if learner_kind == RF:
        return RF_SPACE
    raise ValueError(f"unknown learner {learner_kind!r}")


def grid_points(space: ParamSpace, bins: int = 5) -> list[ParamVector | dict]:
    return [space.decode(point) for point in space.grid(bins)]


def with_params(p: ParamVector, **changes) -> ParamVector:
    return replace(p, **changes)
