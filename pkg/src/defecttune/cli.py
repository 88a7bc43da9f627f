"""Command line entry point.

Exit codes: 0 success, 1 data/runtime error, 2 usage error.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import re
import sys
from pathlib import Path

import numpy as np

from . import dataset, harness, intdim, report
from .evaluation import GOALS
from .harness import BenchConfig, TrialSpec, read_results, run_benchmark, run_trial
from .params import LEARNERS
from .stats import ANALYSIS_SEED

CONFIG_ENV = "DEFECTTUNE_CONFIG"

_LEARNERS = {n.lower(): n for n in LEARNERS}
_TUNERS = {n.lower(): n for n in harness.TUNERS}


class DataError(Exception):
    pass


def _choice(table):
    def parse(text: str) -> str:
        try:
            return table[text.lower()]
        except KeyError:
            raise argparse.ArgumentTypeError(f"choose from {', '.join(table)}") from None
    return parse


def _list_of(table):
    one = _choice(table)

    def parse(text: str) -> list[str]:
        return [one(t) for t in text.split(",") if t]
    return parse


def _goal(text: str) -> str:
    if text.lower() not in GOALS:
        raise argparse.ArgumentTypeError(f"choose from {', '.join(GOALS)}")
    return text.lower()


def _goals(text: str) -> list[str]:
    return [_goal(t) for t in text.split(",") if t]


def _manifest(path) -> dataset.Manifest:
    p = Path(path) if path else dataset.bundled_manifest_path()
    if not p.exists():
        raise DataError(f"manifest not found: {p}")
    return dataset.Manifest.load(p)


def cmd_tune(args) -> int:
    manifest = _manifest(args.manifest)
    if args.threshold is not None:
        manifest.threshold = args.threshold
    triplet = manifest.triplet(args.triplet)
    spec = TrialSpec(triplet, args.learner, args.tuner, args.goal, args.repeat, args.budget)
    rec = run_trial(spec)
    out = rec.to_row()
    out["params"] = json.loads(out["params"]) if out["params"] else None
    print(json.dumps(out, indent=2))
    return 0


def cmd_bench(args) -> int:
    cfg_path = args.config or os.environ.get(CONFIG_ENV)
    cfg = BenchConfig.from_json(cfg_path) if cfg_path else BenchConfig()
    for attr in ("manifest", "repeats", "learners", "tuners", "goals", "workers", "output", "triplets"):
        v = getattr(args, attr)
        if v is not None:
            setattr(cfg, attr, v)
    output = Path(cfg.output or "results.csv")
    manifest = _manifest(cfg.manifest)
    new = 0

    def progress(rec):
        nonlocal new
        new += 1
        if not args.quiet:
            status = rec.status if rec.ok else f"{rec.status} ({rec.message})"
            print(f"[{new}] {rec.triplet} {rec.learner} {rec.tuner} {rec.goal} r{rec.repeat}: {status}",
                  file=sys.stderr)

    records = run_benchmark(
        manifest, cfg.learners, cfg.tuners, cfg.goals, cfg.repeats, cfg.workers, output,
        cfg.triplets, cfg.de_options, progress,
    )
    print(f"{new} new records, {len(records)} total -> {output}")
    if not records:
        return 1
    return 0


def _records(path) -> list:
    p = Path(path)
    if not p.exists():
        raise DataError(f"results file not found: {p}")
    recs = [r for r in read_results(p) if r.ok]
    if not recs:
        raise DataError(f"{p}: no completed records")
    return recs


def _emit(text: str, path) -> None:
    if path:
        Path(path).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def cmd_rank(args) -> int:
    _emit(report.rank_markdown(_records(args.results), seed=args.seed), args.output)
    return 0


def cmd_report(args) -> int:
    recs = _records(args.results)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    gvd = report.grid_vs_de(recs, seed=args.seed)
    runtime = report.runtime_table(recs)
    (out / "grid_vs_de.csv").write_text(report.to_csv(gvd, _GVD_COLS), encoding="utf-8")
    (out / "runtime.csv").write_text(report.to_csv(runtime, _RT_COLS), encoding="utf-8")
    summary = [
        {"learner": k[0], "goal": k[1], **{o: str(v) for o, v in c.items()}}
        for k, c in report.summary_counts(gvd).items()
    ]
    md = ["## Grid search vs DE (win = grid statistically better)\n", report.to_markdown(summary),
          report.to_markdown(gvd), "## Runtime (seconds over all repeats)\n", report.to_markdown(runtime)]
    (out / "report.md").write_text("\n".join(md), encoding="utf-8")
    print(f"wrote {out / 'grid_vs_de.csv'}, {out / 'runtime.csv'}, {out / 'report.md'}")
    return 0


_GVD_COLS = ["triplet", "learner", "goal", "de_median", "grid_median", "grid_outcome"]
_RT_COLS = ["triplet", "learner", "goal", "tuner", "repeats", "seconds", "ratio_to_default", "ratio_to_de"]


def dim_estimates(manifest: dataset.Manifest, per: str = "triplet", **kwargs) -> list:
    triplets = manifest.load_all()
    groups: dict[str, list] = {}
    if per == "triplet":
        for t in triplets:
            groups[t.name] = list(t)
    elif per == "release":
        for t in triplets:
            for d in t:
                groups.setdefault(d.name, [d])
    else:  # project: every distinct release of the project merged
        for t in triplets:
            project = re.sub(r"V\d+$", "", t.name)
            bucket = groups.setdefault(project, [])
            for d in t:
                if all(d is not e for e in bucket):
                    bucket.append(d)
    return [
        intdim.estimate_dimension(dataset.concat(parts, name), **kwargs)
        for name, parts in groups.items()
    ]


def cmd_dim(args) -> int:
    manifest = _manifest(args.manifest)
    est = dim_estimates(manifest, args.per, n_radii=args.radii,
                        upper_fraction=args.upper, lower_fraction=args.lower)
    _emit(report.to_csv(report.dim_rows(est)), args.output)
    if args.curves:
        Path(args.curves).write_text(report.to_csv(report.curve_rows(est)), encoding="utf-8")
    print(f"median m = {np.median([e.m for e in est]):.3f} over {len(est)} datasets", file=sys.stderr)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="defecttune", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    t = sub.add_parser("tune", help="tune one learner on one triplet")
    t.add_argument("--manifest")
    t.add_argument("--triplet", required=True)
    t.add_argument("--learner", type=_choice(_LEARNERS), required=True)
    t.add_argument("--tuner", type=_choice(_TUNERS), required=True)
    t.add_argument("--goal", type=_goal, required=True)
    t.add_argument("--repeat", type=int, default=0)
    t.add_argument("--budget", type=int, help="RANDOM evaluations (default: this trial's DE count)")
    t.add_argument("--threshold", type=int, help="defect-count threshold for binarization")
    t.set_defaults(func=cmd_tune)

    b = sub.add_parser("bench", help="run the benchmark matrix (resumable)")
    b.add_argument("--config", help=f"JSON config (default: ${CONFIG_ENV})")
    b.add_argument("--manifest")
    b.add_argument("--repeats", type=int)
    b.add_argument("--learners", type=_list_of(_LEARNERS))
    b.add_argument("--tuners", type=_list_of(_TUNERS))
    b.add_argument("--goals", type=_goals)
    b.add_argument("--triplets", type=lambda s: [x for x in s.split(",") if x])
    b.add_argument("--workers", type=int)
    b.add_argument("--output")
    b.add_argument("-q", "--quiet", action="store_true")
    b.set_defaults(func=cmd_bench)

    r = sub.add_parser("rank", help="Scott-Knott tables per dataset")
    r.add_argument("--results", required=True)
    r.add_argument("--output")
    r.add_argument("--seed", type=int, default=ANALYSIS_SEED)
    r.set_defaults(func=cmd_rank)

    d = sub.add_parser("dim", help="intrinsic dimensionality per dataset")
    d.add_argument("--manifest")
    d.add_argument("--per", choices=("triplet", "release", "project"), default="triplet")
    d.add_argument("--radii", type=int, default=intdim.N_RADII)
    d.add_argument("--upper", type=float, default=intdim.UPPER_FRACTION)
    d.add_argument("--lower", type=float, default=intdim.LOWER_FRACTION)
    d.add_argument("--output")
    d.add_argument("--curves", help="write per-radius (r, C(r)) rows here")
    d.set_defaults(func=cmd_dim)

    rp = sub.add_parser("report", help="grid-vs-DE and runtime tables")
    rp.add_argument("--results", required=True)
    rp.add_argument("--out-dir", default="report")
    rp.add_argument("--seed", type=int, default=ANALYSIS_SEED)
    rp.set_defaults(func=cmd_report)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    if getattr(args, "repeats", None) is not None and args.repeats < 1:
        parser.error("--repeats must be >= 1")
    try:
        return args.func(args)
    except (DataError, dataset.DatasetError, intdim.EstimationError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
