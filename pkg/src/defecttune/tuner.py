"""Differential evolution, grid search and random search over a ParamSpace.

All tuners maximize ``fitness(params)`` where ``params`` is the decoded
configuration (a ParamVector for learner spaces, a name->value dict for
ad-hoc spaces).
"""
from __future__ import annotations

import csv
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

import numpy as np

from .params import ParamSpace

Fitness = Callable[[Any], float]

DE_POPULATION = 10
DE_GENERATIONS = 10
DE_PATIENCE = 5
DE_F = 0.75
DE_CR = 0.3


@dataclass
class Candidate:
    values: np.ndarray  # continuous, in-bounds; integer dims rounded only on decode
    params: Any
    fitness: float | None = None


@dataclass
class TunerResult:
    best: Candidate
    evaluations: int
    wall_time: float
    history: list[tuple[Any, float]] = field(default_factory=list, repr=False)

    def write_trace(self, path: str | Path, names: list[str]) -> None:
        """Append-only audit log: evaluation index, parameter values, fitness."""
        path = Path(path)
        new = not path.exists()
        with path.open("a", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            if new:
                w.writerow(["evaluation"] + names + ["fitness"])
            for i, (params, fit) in enumerate(self.history):
                vals = params if isinstance(params, dict) else {n: getattr(params, n) for n in names}
                w.writerow([i] + [vals[n] for n in names] + [repr(float(fit))])


class _Tracker:
    """Counts evaluations and keeps the first-found maximum."""

    def __init__(self, space: ParamSpace, fitness: Fitness):
        self.space = space
        self.fitness = fitness
        self.best: Candidate | None = None
        self.history: list[tuple[Any, float]] = []

    def candidate(self, values) -> Candidate:
        values = self.space.clip(values)
        return Candidate(values, self.space.decode(values))

    def evaluate(self, cand: Candidate) -> Candidate:
        cand.fitness = float(self.fitness(cand.params))
        self.history.append((cand.params, cand.fitness))
        if self.best is None or cand.fitness > self.best.fitness:
            self.best = cand
        return cand

    def result(self, t0: float) -> TunerResult:
        return TunerResult(self.best, len(self.history), time.perf_counter() - t0, self.history)


def de_trial_vector(
    A: Candidate,
    B: Candidate,
    C: Candidate,
    D: Candidate,
    f: float = DE_F,
    cr: float = DE_CR,
    rng=None,
    space: ParamSpace | None = None,
) -> Candidate:
    """Build E: B + f*(C - D) where a uniform draw falls below cr, else A.

    One randomly chosen dimension always keeps A's value. The result is
    clipped to the space bounds (integers round on decode).
    """
    if rng is None:
        rng = np.random.default_rng()
    a, b, c, d = (np.asarray(x.values, dtype=float) for x in (A, B, C, D))
    n = a.shape[0]
    r = rng.random(n)
    e = np.where(r < cr, b + f * (c - d), a)
    keep = int(rng.integers(n))
    e[keep] = a[keep]
    if space is None:
        return Candidate(e, None)
    e = space.clip(e)
    return Candidate(e, space.decode(e))


def run_de(
    space: ParamSpace,
    fitness: Fitness,
    seed: int,
    population: int = DE_POPULATION,
    generations: int = DE_GENERATIONS,
    patience: int = DE_PATIENCE,
    f: float = DE_F,
    cr: float = DE_CR,
) -> TunerResult:
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    track = _Tracker(space, fitness)
    frontier = [track.evaluate(track.candidate(space.sample(rng))) for _ in range(population)]
    stagnant = 0
    for _ in range(generations):
        before = track.best.fitness
        trials = []
        for i, parent in enumerate(frontier):
            others = [j for j in range(len(frontier)) if j != i]
            b, c, d = rng.choice(others, 3, replace=False)
            trials.append(
                de_trial_vector(parent, frontier[b], frontier[c], frontier[d], f, cr, rng, space)
            )
        for i, trial in enumerate(trials):
            track.evaluate(trial)
            if trial.fitness > frontier[i].fitness:
                frontier[i] = trial
        stagnant = 0 if track.best.fitness > before else stagnant + 1
        if stagnant >= patience:
            break
    return track.result(t0)


def run_grid(space: ParamSpace, fitness: Fitness, seed: int | None = None, bins: int = 5) -> TunerResult:
    """Evaluate every grid point once, in canonical (lexicographic) order."""
    t0 = time.perf_counter()
    track = _Tracker(space, fitness)
    for point in space.grid(bins):
        values = np.array(point, dtype=float)
        track.evaluate(Candidate(values, space.decode(values)))
    return track.result(t0)


def run_random(space: ParamSpace, fitness: Fitness, budget: int, seed: int) -> TunerResult:
    if budget < 1:
        raise ValueError("budget must be >= 1")
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    track = _Tracker(space, fitness)
    for _ in range(budget):
        track.evaluate(track.candidate(space.sample(rng)))
    return track.result(t0)
