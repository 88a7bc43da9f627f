"""Tables built from benchmark records: Scott-Knott ranks, grid-vs-DE outcomes, runtimes."""
from __future__ import annotations

import csv
import io
from collections import defaultdict
from typing import Iterable, Sequence

import numpy as np

from .harness import DE, DEFAULT, GRID, TUNERS, RunRecord
from .intdim import DimEstimate
from .stats import ANALYSIS_SEED, Treatment, scott_knott


def _cells(records: Iterable[RunRecord]) -> dict[tuple, dict[str, list[RunRecord]]]:
    cells: dict[tuple, dict[str, list[RunRecord]]] = defaultdict(lambda: defaultdict(list))
    for r in records:
        if r.ok:
            cells[(r.triplet, r.learner, r.goal)][r.tuner].append(r)
    for by_tuner in cells.values():
        for rs in by_tuner.values():
            rs.sort(key=lambda r: r.repeat)
    return cells


def _order(cells) -> list[tuple]:
    return sorted(cells)


def treatments(by_tuner: dict[str, list[RunRecord]], learner: str, goal: str,
               tuners: Sequence[str] = TUNERS) -> list[Treatment]:
    return [
        Treatment(f"{learner}_{t}", [r.score(goal) for r in by_tuner[t]])
        for t in tuners
        if by_tuner.get(t)
    ]


def _fmt(x: float) -> str:
    return f"{x:.4f}"


def rank_markdown(records: Iterable[RunRecord], seed: int = ANALYSIS_SEED) -> str:
    """One Scott-Knott table per (triplet, learner, goal)."""
    cells = _cells(records)
    out = []
    for key in _order(cells):
        triplet, learner, goal = key
        ts = treatments(cells[key], learner, goal)
        if not ts:
            continue
        ranked = scott_knott(ts, seed=seed)
        out.append(f"### {triplet} / {learner} / {goal}\n")
        out.append("| rank | treatment | median | IQR | n |")
        out.append("|---:|---|---:|---:|---:|")
        by_name = {t.name: t for t in ts}
        for i, group in enumerate(ranked.groups, start=1):
            for name in group:
                t = by_name[name]
                out.append(f"| {i} | {name} | {_fmt(t.median)} | {_fmt(t.iqr)} | {len(t.samples)} |")
        out.append("")
    return "\n".join(out)


def grid_vs_de(records: Iterable[RunRecord], seed: int = ANALYSIS_SEED) -> list[dict]:
    """Per cell: 'win' when grid is ranked statistically better than DE, 'loss' when worse."""
    cells = _cells(records)
    rows = []
    for key in _order(cells):
        triplet, learner, goal = key
        by_tuner = cells[key]
        if not (by_tuner.get(GRID) and by_tuner.get(DE)):
            continue
        ts = treatments(by_tuner, learner, goal, (DE, GRID))
        ranked = scott_knott(ts, seed=seed)
        g, d = ranked.rank_of(f"{learner}_{GRID}"), ranked.rank_of(f"{learner}_{DE}")
        outcome = "tie" if g == d else ("win" if g < d else "loss")
        rows.append({
            "triplet": triplet, "learner": learner, "goal": goal,
            "de_median": _fmt(ts[0].median), "grid_median": _fmt(ts[1].median),
            "grid_outcome": outcome,
        })
    return rows


def runtime_table(records: Iterable[RunRecord]) -> list[dict]:
    """Total seconds over repeats per tuner, raw and relative to DEFAULT and DE."""
    cells = _cells(records)
    rows = []
    for key in _order(cells):
        triplet, learner, goal = key
        by_tuner = cells[key]
        totals = {
            t: sum(r.tune_seconds + r.train_test_seconds for r in rs)
            for t, rs in by_tuner.items()
        }
        for t in TUNERS:
            if t not in totals:
                continue
            rows.append({
                "triplet": triplet, "learner": learner, "goal": goal, "tuner": t,
                "repeats": str(len(by_tuner[t])),
                "seconds": f"{totals[t]:.6g}",
                "ratio_to_default": _ratio(totals[t], totals.get(DEFAULT)),
                "ratio_to_de": _ratio(totals[t], totals.get(DE)),
            })
    return rows


def _ratio(a: float, b: float | None) -> str:
    if not b:
        return ""
    return f"{a / b:.1f}"


def summary_counts(rows: Sequence[dict]) -> dict[tuple, dict[str, int]]:
    out: dict[tuple, dict[str, int]] = defaultdict(lambda: {"win": 0, "tie": 0, "loss": 0})
    for r in rows:
        out[(r["learner"], r["goal"])][r["grid_outcome"]] += 1
    return dict(sorted(out.items()))


def to_csv(rows: Sequence[dict], columns: Sequence[str] | None = None) -> str:
    buf = io.StringIO()
    if not rows and columns is None:
        return ""
    w = csv.DictWriter(buf, columns or list(rows[0]), lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue()


def to_markdown(rows: Sequence[dict]) -> str:
    if not rows:
        return ""
    cols = list(rows[0])
    lines = ["| " + " | ".join(cols) + " |", "|" + "---|" * len(cols)]
    lines += ["| " + " | ".join(str(r[c]) for c in cols) + " |" for r in rows]
    return "\n".join(lines) + "\n"


def dim_rows(estimates: Sequence[DimEstimate]) -> list[dict]:
    rows = [
        {
            "dataset": e.dataset_name, "k": str(e.points_used), "n": str(e.n),
            "m": f"{e.m:.4f}", "r_lo": f"{e.r_window[0]:.6g}", "r_hi": f"{e.r_window[1]:.6g}",
        }
        for e in estimates
    ]
    if estimates:
        rows.append({"dataset": "MEDIAN", "k": "", "n": "",
                     "m": f"{float(np.median([e.m for e in estimates])):.4f}", "r_lo": "", "r_hi": ""})
    return rows


def curve_rows(estimates: Sequence[DimEstimate]) -> list[dict]:
    return [
        {"dataset": e.dataset_name, "r": f"{r:.6g}", "c": f"{c:.6g}"}
        for e in estimates
        for r, c in zip(e.curve.radii, e.curve.c_values)
    ]
