"""
A small benchmark and its Scott-Knott ranking
=============================================

Three triplets, CART only, three repeats. The results file is resumable:
running the script twice reuses finished trials.
"""
from pathlib import Path

from defecttune.dataset import load_bundled
from defecttune.harness import DE, DEFAULT, GRID, RANDOM, run_benchmark
from defecttune.report import grid_vs_de, rank_markdown, runtime_table, to_markdown

out = Path("demo_results.csv")
records = run_benchmark(
    load_bundled(), learners=["CART"], tuners=[DE, GRID, RANDOM, DEFAULT], goals=["f"],
    repeats=3, output=out, triplets=["antV0", "ivy", "log4j"],
)
print(f"{len(records)} records in {out}")

print(rank_markdown(records))
print(to_markdown(grid_vs_de(records)))
print(to_markdown(runtime_table(records)))
