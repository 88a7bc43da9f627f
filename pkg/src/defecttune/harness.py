"""Experimental protocol: release triplets x learners x tuners x goals x repeats.

Each trial trains on release i, scores candidates on release i+1 and
reports the winner's scores on release i+2. The untuned baseline trains on
releases i and i+1 together. Every (triplet, repeat) pair gets one seed
shared by all tuners and learners.
"""
from __future__ import annotations

import csv
import hashlib
import json
import logging
import math
import statistics
import time
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .dataset import Manifest, ReleaseTriplet, concat
from .evaluation import GOALS, Scores, evaluate
from .learner import predict, train
from .params import LEARNERS, ParamVector, space_for
from .tuner import TunerResult, run_de, run_grid, run_random

log = logging.getLogger(__name__)

DE, GRID, RANDOM, DEFAULT = "DE", "GRID", "RANDOM", "DEFAULT"
TUNERS = (DE, GRID, RANDOM, DEFAULT)

SCHEMA_LINE = "# defecttune-results schema=1"
COLUMNS = [
    "triplet", "learner", "tuner", "goal", "repeat", "seed",
    "pd", "pf", "precision", "f",
    "evaluations", "tune_seconds", "train_test_seconds", "status",
    "params", "message",
]


def derive_seed(dataset_name: str, repeat_index: int) -> int:
    """64-bit seed from (triplet name, repeat); shared by every tuner and learner."""
    digest = hashlib.blake2b(
        f"{dataset_name}\x1f{int(repeat_index)}".encode(), digest_size=8, person=b"defecttune"
    ).digest()
    return int.from_bytes(digest, "little")


@dataclass(frozen=True)
class TrialSpec:
    triplet: ReleaseTriplet
    learner_kind: str
    tuner_kind: str
    goal: str
    repeat_index: int
    budget: int | None = None  # RANDOM only

    def __post_init__(self):
        if self.learner_kind not in LEARNERS:
            raise ValueError(f"unknown learner {self.learner_kind!r}")
        if self.tuner_kind not in TUNERS:
            raise ValueError(f"unknown tuner {self.tuner_kind!r}")
        if self.goal not in GOALS:
            raise ValueError(f"unknown goal {self.goal!r}")
        if self.repeat_index < 0:
            raise ValueError("repeat_index must be >= 0")

    @property
    def key(self) -> tuple:
        return (self.triplet.name, self.learner_kind, self.tuner_kind, self.goal, self.repeat_index)

    @property
    def seed(self) -> int:
        return derive_seed(self.triplet.name, self.repeat_index)


@dataclass
class RunRecord:
    triplet: str
    learner: str
    tuner: str
    goal: str
    repeat: int
    seed: int
    test_scores: Scores | None
    best_params: ParamVector | None
    evaluations: int
    tune_seconds: float
    train_test_seconds: float
    status: str = "ok"
    message: str = ""

    @property
    def key(self) -> tuple:
        return (self.triplet, self.learner, self.tuner, self.goal, self.repeat)

    @property
    def ok(self) -> bool:
        return self.status == "ok"

    def score(self, goal: str | None = None) -> float:
        return self.test_scores.goal(goal or self.goal)

    def to_row(self) -> dict[str, str]:
        s = self.test_scores
        return {
            "triplet": self.triplet,
            "learner": self.learner,
            "tuner": self.tuner,
            "goal": self.goal,
            "repeat": str(self.repeat),
            "seed": str(self.seed),
            "pd": _num(s and s.pd),
            "pf": _num(s and s.pf),
            "precision": _num(s and s.precision),
            "f": _num(s and s.f),
            "evaluations": str(self.evaluations),
            "tune_seconds": _num(self.tune_seconds),
            "train_test_seconds": _num(self.train_test_seconds),
            "status": self.status,
            "params": json.dumps(self.best_params.as_dict(), sort_keys=True) if self.best_params else "",
            "message": self.message,
        }

    @classmethod
    def from_row(cls, row: dict[str, str]) -> "RunRecord":
        scores = None
        if row["pd"] != "":
            scores = Scores(*(float(row[k]) for k in ("pd", "pf", "precision", "f")))
        params = ParamVector.from_dict(json.loads(row["params"])) if row.get("params") else None
        return cls(
            row["triplet"], row["learner"], row["tuner"], row["goal"], int(row["repeat"]),
            int(row["seed"]), scores, params, int(row["evaluations"]),
            float(row["tune_seconds"]), float(row["train_test_seconds"]),
            row["status"], row.get("message", ""),
        )


def _num(x) -> str:
    return "" if x is None else repr(float(x))


def goal_fitness(triplet: ReleaseTriplet, goal: str, seed: int):
    """Candidate score: train on release i, evaluate ``goal`` on release i+1."""

    def fitness(p: ParamVector) -> float:
        model = train(triplet.train, p, seed)
        return evaluate(triplet.tune.y, predict(model, triplet.tune)).goal(goal)

    return fitness


def run_trial(spec: TrialSpec, de_options: dict | None = None) -> RunRecord:
    triplet, seed = spec.triplet, spec.seed
    space = space_for(spec.learner_kind)
    de_options = de_options or {}

    if spec.tuner_kind == DEFAULT:
        params = ParamVector.default(spec.learner_kind)
        t0 = time.perf_counter()
        merged = concat([triplet.train, triplet.tune], f"{triplet.name}:train+tune")
        model = train(merged, params, seed)
        scores = evaluate(triplet.test.y, predict(model, triplet.test))
        elapsed = time.perf_counter() - t0
        return _record(spec, scores, params, 0, 0.0, elapsed)

    fitness = goal_fitness(triplet, spec.goal, seed)
    t0 = time.perf_counter()
    if spec.tuner_kind == DE:
        result: TunerResult = run_de(space, fitness, seed, **de_options)
    elif spec.tuner_kind == GRID:
        result = run_grid(space, fitness, seed)
    else:
        budget = spec.budget
        if budget is None:
            # no DE cell to take the median from: use this trial's own DE run
            budget = run_de(space, fitness, seed, **de_options).evaluations
        result = run_random(space, fitness, budget, seed)
    tune_seconds = time.perf_counter() - t0

    best = result.best.params
    t1 = time.perf_counter()
    model = train(triplet.train, best, seed)
    scores = evaluate(triplet.test.y, predict(model, triplet.test))
    elapsed = time.perf_counter() - t1
    return _record(spec, scores, best, result.evaluations, tune_seconds, elapsed)


def _record(spec, scores, params, evaluations, tune_s, tt_s) -> RunRecord:
    name, learner, tuner, goal, repeat = spec.key
    return RunRecord(name, learner, tuner, goal, repeat, spec.seed, scores, params,
                     evaluations, tune_s, tt_s)


def _safe_trial(spec: TrialSpec, de_options: dict | None) -> RunRecord:
    try:
        return run_trial(spec, de_options)
    except Exception as exc:  # recorded, never fatal to the sweep
        name, learner, tuner, goal, repeat = spec.key
        return RunRecord(name, learner, tuner, goal, repeat, spec.seed, None, None, 0, 0.0, 0.0,
                         "error", f"{type(exc).__name__}: {exc}")


class ResultsFile:
    """Append-only results CSV with a schema line; the single writer."""

    def __init__(self, path: str | Path):
        self.path = Path(path)

    def read(self) -> list[RunRecord]:
        return read_results(self.path) if self.path.exists() else []

    def append(self, records: Iterable[RunRecord]) -> None:
        new = not self.path.exists() or self.path.stat().st_size == 0
        self.path.parent.mkdir(parents=True, exist_ok=True)
        with self.path.open("a", newline="", encoding="utf-8") as fh:
            if new:
                fh.write(SCHEMA_LINE + "\n")
            w = csv.DictWriter(fh, COLUMNS, lineterminator="\n")
            if new:
                w.writeheader()
            for r in records:
                w.writerow(r.to_row())


def read_results(path: str | Path) -> list[RunRecord]:
    """Records in file order; a later row for the same key replaces an earlier one."""
    with Path(path).open(newline="", encoding="utf-8") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    latest: dict[tuple, RunRecord] = {}
    for row in csv.DictReader(lines):
        rec = RunRecord.from_row(row)
        latest.pop(rec.key, None)
        latest[rec.key] = rec
    return list(latest.values())


def write_results(records: Sequence[RunRecord], path: str | Path) -> None:
    path = Path(path)
    if path.exists():
        path.unlink()
    ResultsFile(path).append(records)


def random_budget(de_evaluations: Sequence[int]) -> int:
    """Median DE evaluation count, halves rounded up."""
    return int(math.floor(statistics.median(de_evaluations) + 0.5))


@dataclass
class BenchConfig:
    manifest: str | Path | None = None
    repeats: int = 20
    learners: Sequence[str] = LEARNERS
    tuners: Sequence[str] = TUNERS
    goals: Sequence[str] = GOALS
    workers: int = 1
    output: str | Path | None = None
    triplets: Sequence[str] | None = None
    de_options: dict = field(default_factory=dict)

    @classmethod
    def from_json(cls, path: str | Path) -> "BenchConfig":
        path = Path(path)
        raw = json.loads(path.read_text(encoding="utf-8"))
        known = set(cls.__dataclass_fields__)
        unknown = set(raw) - known
        if unknown:
            raise ValueError(f"{path}: unknown config keys {sorted(unknown)}")
        cfg = cls(**raw)
        for attr in ("manifest", "output"):
            v = getattr(cfg, attr)
            if v is not None and not Path(v).is_absolute():
                setattr(cfg, attr, path.parent / v)
        return cfg


def run_benchmark(
    manifest: Manifest,
    learners: Sequence[str] = LEARNERS,
    tuners: Sequence[str] = TUNERS,
    goals: Sequence[str] = GOALS,
    repeats: int = 20,
    workers: int = 1,
    output: str | Path | None = None,
    triplets: Sequence[str] | None = None,
    de_options: dict | None = None,
    progress=None,
) -> list[RunRecord]:
    """Run the cross product of trials; returns every record for this sweep.

    RANDOM trials run in a second phase, once the DE budget of their
    (triplet, learner, goal) cell is known. With ``output`` set, records are
    appended as they complete and keys already recorded as ok are skipped.
    """
    if repeats < 1:
        raise ValueError("repeats must be >= 1")
    for t in tuners:
        if t not in TUNERS:
            raise ValueError(f"unknown tuner {t!r}")
    names = list(triplets) if triplets is not None else manifest.names
    loaded = {n: manifest.triplet(n) for n in names}
    sink = ResultsFile(output) if output is not None else None
    done: dict[tuple, RunRecord] = {}
    if sink is not None:
        done = {r.key: r for r in sink.read() if r.ok}

    def specs(phase_tuners, budgets=None):
        out = []
        for n in names:
            for learner in learners:
                for tuner in phase_tuners:
                    for goal in goals:
                        for rep in range(repeats):
                            budget = None
                            if tuner == RANDOM and budgets is not None:
                                budget = budgets.get((n, learner, goal))
                            out.append(TrialSpec(loaded[n], learner, tuner, goal, rep, budget))
        return out

    records: dict[tuple, RunRecord] = {}
    first = [t for t in TUNERS if t in tuners and t != RANDOM]
    _execute(specs(first), done, records, sink, workers, de_options, progress)

    if RANDOM in tuners:
        budgets = {}
        for n in names:
            for learner in learners:
                for goal in goals:
                    evals = [
                        r.evaluations
                        for rep in range(repeats)
                        for r in [records.get((n, learner, DE, goal, rep)) or done.get((n, learner, DE, goal, rep))]
                        if r is not None and r.ok
                    ]
                    if evals:
                        budgets[(n, learner, goal)] = random_budget(evals)
        _execute(specs([RANDOM], budgets), done, records, sink, workers, de_options, progress)

    return list(records.values())


def _execute(specs, done, records, sink, workers, de_options, progress) -> None:
    todo = []
    for s in specs:
        if s.key in done:
            records[s.key] = done[s.key]
        else:
            todo.append(s)
    if not todo:
        return

    def collect(rec: RunRecord):
        records[rec.key] = rec
        if sink is not None:
            sink.append([rec])
        if rec.status != "ok":
            log.warning("trial %s failed: %s", rec.key, rec.message)
        if progress is not None:
            progress(rec)

    if workers <= 1:
        for s in todo:
            collect(_safe_trial(s, de_options))
        return
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(_safe_trial, s, de_options) for s in todo]
        for fut in as_completed(futures):
            collect(fut.result())
