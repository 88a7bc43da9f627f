"""Confusion counts and the pd / pf / precision / F measures."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# pd and pf are reported only: each can be pushed to an extreme on its own.
GOALS = ("precision", "f")


@dataclass(frozen=True)
class ConfusionCounts:
    tn: int
    fn: int
    fp: int
    tp: int

    @property
    def total(self) -> int:
        return self.tn + self.fn + self.fp + self.tp


@dataclass(frozen=True)
class Scores:
    pd: float
    pf: float
    precision: float
    f: float

    def goal(self, name: str) -> float:
        if name not in GOALS:
            raise ValueError(f"{name!r} is not an optimization goal; use one of {GOALS}")
        return getattr(self, name)


def confusion(actual, predicted) -> ConfusionCounts:
    actual = np.asarray(actual, dtype=bool)
    predicted = np.asarray(predicted, dtype=bool)
    if actual.shape != predicted.shape:
        raise ValueError(f"length mismatch: {actual.shape} vs {predicted.shape}")
    if actual.size == 0:
        raise ValueError("nothing to evaluate")
    tp = int(np.count_nonzero(actual & predicted))
    fn = int(np.count_nonzero(actual & ~predicted))
    fp = int(np.count_nonzero(~actual & predicted))
    tn = actual.size - tp - fn - fp
    return ConfusionCounts(tn, fn, fp, tp)


def _ratio(a: float, b: float) -> float:
    return a / b if b else 0.0


def scores(c: ConfusionCounts) -> Scores:
    """Derived measures; any 0/0 evaluates to 0."""
    if c.total == 0:
        raise ValueError("no instances counted")
    pd = _ratio(c.tp, c.fn + c.tp)
    pf = _ratio(c.fp, c.tn + c.fp)
    prec = _ratio(c.tp, c.tp + c.fp)
    f = _ratio(2 * pd * prec, pd + prec)
    return Scores(pd, pf, prec, f)


def evaluate(actual, predicted) -> Scores:
    return scores(confusion(actual, predicted))
