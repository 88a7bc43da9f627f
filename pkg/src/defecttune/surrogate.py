"""Deterministic stand-in releases shaped like the PROMISE CK-metric tables.

The real PROMISE files are not redistributed with this package. The bundled
fixtures are produced here instead: every release has exactly the row count
and defective count of the corresponding PROMISE release, and metric columns
follow the usual CK-metric shape (heavy-tailed size measures driven by a
couple of latent factors, small-integer inheritance measures, ratios in
[0, 1]). Point a manifest at real CSVs to run on the original data.

Regenerate with ``python -m defecttune.surrogate [out_dir]``.
"""
from __future__ import annotations

import hashlib
import json
import sys
from pathlib import Path

import numpy as np

from .dataset import METRICS, TRIPLET_COUNTS, Dataset, write_csv

# release file stem -> (defective, total)
RELEASES: dict[str, tuple[int, int]] = {
    "ant-1.3": (20, 125), "ant-1.4": (40, 178), "ant-1.5": (32, 293),
    "ant-1.6": (92, 351), "ant-1.7": (166, 745),
    "camel-1.0": (13, 339), "camel-1.2": (216, 608), "camel-1.4": (145, 872),
    "camel-1.6": (188, 965),
    "ivy-1.1": (63, 111), "ivy-1.4": (16, 241), "ivy-2.0": (40, 352),
    "jedit-3.2": (90, 272), "jedit-4.0": (75, 306), "jedit-4.1": (79, 312),
    "jedit-4.2": (48, 367), "jedit-4.3": (11, 492),
    "log4j-1.0": (34, 135), "log4j-1.1": (37, 109), "log4j-1.2": (189, 205),
    "lucene-2.0": (91, 195), "lucene-2.2": (144, 247), "lucene-2.4": (203, 340),
    "poi-1.5": (141, 237), "poi-2.0": (37, 314), "poi-2.5": (248, 385),
    "poi-3.0": (281, 442),
    "synapse-1.0": (16, 157), "synapse-1.1": (60, 222), "synapse-1.2": (86, 256),
    "velocity-1.4": (147, 196), "velocity-1.5": (142, 214), "velocity-1.6": (78, 229),
    "xerces-init": (77, 162), "xerces-1.2": (71, 440), "xerces-1.3": (69, 453),
    "xerces-1.4": (437, 588),
}

TRIPLETS: dict[str, tuple[str, str, str]] = {
    "antV0": ("ant-1.3", "ant-1.4", "ant-1.5"),
    "antV1": ("ant-1.4", "ant-1.5", "ant-1.6"),
    "antV2": ("ant-1.5", "ant-1.6", "ant-1.7"),
    "camelV0": ("camel-1.0", "camel-1.2", "camel-1.4"),
    "camelV1": ("camel-1.2", "camel-1.4", "camel-1.6"),
    "ivy": ("ivy-1.1", "ivy-1.4", "ivy-2.0"),
    "jeditV0": ("jedit-3.2", "jedit-4.0", "jedit-4.1"),
    "jeditV1": ("jedit-4.0", "jedit-4.1", "jedit-4.2"),
    "jeditV2": ("jedit-4.1", "jedit-4.2", "jedit-4.3"),
    "log4j": ("log4j-1.0", "log4j-1.1", "log4j-1.2"),
    "lucene": ("lucene-2.0", "lucene-2.2", "lucene-2.4"),
    "poiV0": ("poi-1.5", "poi-2.0", "poi-2.5"),
    "poiV1": ("poi-2.0", "poi-2.5", "poi-3.0"),
    "synapse": ("synapse-1.0", "synapse-1.1", "synapse-1.2"),
    "velocity": ("velocity-1.4", "velocity-1.5", "velocity-1.6"),
    "xercesV0": ("xerces-init", "xerces-1.2", "xerces-1.3"),
    "xercesV1": ("xerces-1.2", "xerces-1.3", "xerces-1.4"),
}


def _seed(text: str) -> int:
    return int.from_bytes(hashlib.blake2b(text.encode(), digest_size=8).digest(), "little")


def _project_profile(project: str) -> dict:
    rng = np.random.default_rng(_seed("project:" + project))
    return {
        "size_mu": rng.normal(0.0, 0.3),
        "loc_per_method": rng.uniform(2.6, 3.4),
        "coupling_mu": rng.normal(0.0, 0.3),
        # how strongly defect risk follows size vs coupling vs noise
        "w_size": rng.uniform(0.6, 1.4),
        "w_coupling": rng.uniform(0.2, 0.9),
        "w_noise": rng.uniform(0.4, 1.0),
    }


def generate_release(stem: str) -> Dataset:
    defective, total = RELEASES[stem]
    project = stem.split("-")[0]
    prof = _project_profile(project)
    rng = np.random.default_rng(_seed("release:" + stem))
    n = total

    size = rng.normal(prof["size_mu"] + rng.normal(0, 0.1), 1.0, n)
    coupling = 0.5 * size + rng.normal(prof["coupling_mu"], 0.85, n)
    lognoise = lambda s: rng.normal(0.0, s, n)

    wmc = np.round(np.exp(1.6 + 0.9 * size + lognoise(0.35))).clip(0)
    npm = np.round(wmc * rng.beta(4, 2, n))
    loc = np.round(np.exp(prof["loc_per_method"] + lognoise(0.5)) * np.maximum(wmc, 1) + rng.integers(0, 10, n))
    amc = np.round(loc / np.maximum(wmc, 1) * rng.uniform(0.7, 1.0, n), 2)
    max_cc = np.round(np.exp(0.7 + 0.6 * size + lognoise(0.4))).clip(0)
    avg_cc = np.round(max_cc * rng.beta(3, 3, n), 2)
    rfc = np.round(wmc + np.exp(1.5 + 0.8 * coupling + lognoise(0.4)))
    cbo = np.round(np.exp(1.2 + 0.8 * coupling + lognoise(0.4)))
    ce = np.round(cbo * rng.beta(5, 3, n))
    ca = np.maximum(cbo - ce, 0) + rng.poisson(np.exp(-0.5 + 0.3 * coupling))
    lcom = np.round(wmc * np.maximum(wmc - 1, 0) / 2 * rng.beta(2, 2, n))
    lcom3 = np.round(2 * rng.beta(2, 3, n), 4)
    cam = np.round(np.clip(1.0 / (1.0 + 0.15 * wmc) + rng.normal(0, 0.05, n), 0.02, 1.0), 4)
    dam = np.round(np.where(rng.random(n) < 0.55, 1.0, rng.beta(1, 2, n)), 4)
    moa = rng.poisson(np.exp(-0.7 + 0.5 * coupling))
    dit = rng.geometric(0.55, n) + (rng.random(n) < 0.3)
    noc = np.where(rng.random(n) < 0.85, 0, rng.geometric(0.4, n))
    mfa = np.round(np.where(dit <= 1, 0.0, rng.beta(3, 2, n)), 4)
    ic = np.minimum(rng.binomial(np.maximum(dit - 1, 0), 0.4), 4)
    cbm = ic * rng.poisson(1.5, n)

    cols = {
        "amc": amc, "avg_cc": avg_cc, "ca": ca, "cam": cam, "cbm": cbm, "cbo": cbo,
        "ce": ce, "dam": dam, "dit": dit, "ic": ic, "lcom": lcom, "lcom3": lcom3,
        "loc": loc, "max_cc": max_cc, "mfa": mfa, "moa": moa, "noc": noc, "npm": npm,
        "rfc": rfc, "wmc": wmc,
    }
    X = np.column_stack([cols[m].astype(np.float64) for m in METRICS])

    # exact number of defective rows, sampled by risk without replacement (Gumbel top-k)
    risk = prof["w_size"] * size + prof["w_coupling"] * coupling + prof["w_noise"] * rng.normal(0, 1, n)
    keys = risk + rng.gumbel(0, 1, n)
    bugs = np.zeros(n, dtype=np.int64)
    top = np.argsort(-keys, kind="stable")[:defective]
    bugs[top] = rng.geometric(0.55, defective)
    return Dataset(stem, X, bugs)


def write_fixtures(out_dir: str | Path) -> Path:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for stem in RELEASES:
        write_csv(generate_release(stem), out_dir / f"{stem}.csv")
    manifest = {
        "threshold": 1,
        "triplets": {
            name: dict(zip(("train", "tune", "test"), (f"{s}.csv" for s in stems)))
            for name, stems in TRIPLETS.items()
        },
    }
    path = out_dir / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    return path


assert set(TRIPLETS) == set(TRIPLET_COUNTS)
assert all(
    tuple(RELEASES[s] for s in TRIPLETS[t]) == TRIPLET_COUNTS[t] for t in TRIPLETS
), "release table disagrees with triplet counts"

if __name__ == "__main__":
    print(write_fixtures(sys.argv[1] if len(sys.argv) > 1 else Path(__file__).parent / "data"))
