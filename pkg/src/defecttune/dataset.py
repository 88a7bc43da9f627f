"""Defect datasets: CSV loading, binarization, normalization and release triplets."""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np

METRICS: tuple[str, ...] = (
    "amc", "avg_cc", "ca", "cam", "cbm", "cbo", "ce", "dam", "dit", "ic",
    "lcom", "lcom3", "loc", "max_cc", "mfa", "moa", "noc", "npm", "rfc", "wmc",
)
BUG_COLUMN = "bug"

# (defective, total) per release of every bundled triplet: train, tune, test.
TRIPLET_COUNTS: dict[str, tuple[tuple[int, int], tuple[int, int], tuple[int, int]]] = {
    "antV0": ((20, 125), (40, 178), (32, 293)),
    "antV1": ((40, 178), (32, 293), (92, 351)),
    "antV2": ((32, 293), (92, 351), (166, 745)),
    "camelV0": ((13, 339), (216, 608), (145, 872)),
    "camelV1": ((216, 608), (145, 872), (188, 965)),
    "ivy": ((63, 111), (16, 241), (40, 352)),
    "jeditV0": ((90, 272), (75, 306), (79, 312)),
    "jeditV1": ((75, 306), (79, 312), (48, 367)),
    "jeditV2": ((79, 312), (48, 367), (11, 492)),
    "log4j": ((34, 135), (37, 109), (189, 205)),
    "lucene": ((91, 195), (144, 247), (203, 340)),
    "poiV0": ((141, 237), (37, 314), (248, 385)),
    "poiV1": ((37, 314), (248, 385), (281, 442)),
    "synapse": ((16, 157), (60, 222), (86, 256)),
    "velocity": ((147, 196), (142, 214), (78, 229)),
    "xercesV0": ((77, 162), (71, 440), (69, 453)),
    "xercesV1": ((71, 440), (69, 453), (437, 588)),
}


class DatasetError(ValueError):
    pass


class SchemaError(DatasetError):
    pass


class DataParseError(DatasetError):
    def __init__(self, message: str, row: int | None = None):
        super().__init__(message)
        self.row = row


class EmptyDatasetError(DatasetError):
    pass


@dataclass(frozen=True)
class Instance:
    metrics: tuple[float, ...]
    defect_count: int
    label: bool | None = None


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Dataset:
    """Rows of code metrics with per-row defect counts.

    ``X`` is an (n, len(schema)) float array, ``bugs`` the integer defect
    counts and ``labels`` the boolean defective flags (``None`` until
    :func:`binarize` has been applied). Arrays are read-only.
    """

    name: str
    X: np.ndarray
    bugs: np.ndarray
    labels: np.ndarray | None = None
    schema: tuple[str, ...] = METRICS

    def __post_init__(self):
        X = np.asarray(self.X, dtype=np.float64)
        if X.ndim != 2 or X.shape[0] == 0:
            raise EmptyDatasetError(f"{self.name}: dataset has no rows")
        if X.shape[1] != len(self.schema):
            raise SchemaError(
                f"{self.name}: {X.shape[1]} metric columns, schema has {len(self.schema)}"
            )
        if not np.all(np.isfinite(X)):
            raise DataParseError(f"{self.name}: non-finite metric values")
        bugs = np.asarray(self.bugs, dtype=np.int64)
        if bugs.shape != (X.shape[0],) or np.any(bugs < 0):
            raise DataParseError(f"{self.name}: defect counts must be one non-negative int per row")
        object.__setattr__(self, "X", _frozen(X))
        object.__setattr__(self, "bugs", _frozen(bugs))
        object.__setattr__(self, "schema", tuple(self.schema))
        if self.labels is not None:
            labels = np.asarray(self.labels, dtype=bool)
            if labels.shape != bugs.shape:
                raise DatasetError(f"{self.name}: label vector has the wrong length")
            object.__setattr__(self, "labels", _frozen(labels))

    def __len__(self) -> int:
        return self.X.shape[0]

    def __iter__(self) -> Iterator[Instance]:
        for i in range(len(self)):
            label = None if self.labels is None else bool(self.labels[i])
            yield Instance(tuple(self.X[i].tolist()), int(self.bugs[i]), label)

    @property
    def instances(self) -> list[Instance]:
        return list(self)

    @property
    def defective_count(self) -> int:
        return int(np.count_nonzero(self.bugs >= 1))

    @property
    def y(self) -> np.ndarray:
        if self.labels is None:
            raise DatasetError(f"{self.name}: dataset has not been binarized")
        return self.labels

    def with_name(self, name: str) -> "Dataset":
        return Dataset(name, self.X, self.bugs, self.labels, self.schema)


def load_csv(
    path: str | Path,
    schema: Sequence[str] = METRICS,
    name: str | None = None,
    ignore_columns: Sequence[str] = (),
) -> Dataset:
    """Read a metrics CSV whose header is ``schema`` followed by a ``bug`` column.

    Columns named in ``ignore_columns`` (e.g. the ``name``/``version``
    columns of raw PROMISE exports) are dropped before the schema check.
    """
    path = Path(path)
    schema = tuple(schema)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise SchemaError(f"{path}: missing header row") from None
        keep = [i for i, h in enumerate(header) if h not in ignore_columns]
        kept = [header[i] for i in keep]
        expected = list(schema) + [BUG_COLUMN]
        if kept != expected:
            missing = [c for c in expected if c not in kept]
            extra = [c for c in kept if c not in expected]
            raise SchemaError(
                f"{path}: header mismatch (missing={missing}, extra={extra})"
                if missing or extra
                else f"{path}: columns out of order"
            )
        rows, bugs = [], []
        for lineno, raw in enumerate(reader, start=2):
            if not raw or all(not c.strip() for c in raw):
                continue
            if len(raw) != len(header):
                raise DataParseError(
                    f"{path}: row {lineno} has {len(raw)} cells, expected {len(header)}", lineno
                )
            cells = [raw[i].strip() for i in keep]
            try:
                values = [float(c) for c in cells[:-1]]
                bug = float(cells[-1])
            except ValueError:
                raise DataParseError(f"{path}: non-numeric cell in row {lineno}", lineno) from None
            if not all(math.isfinite(v) for v in values) or not math.isfinite(bug):
                raise DataParseError(f"{path}: non-finite value in row {lineno}", lineno)
            if bug < 0 or bug != int(bug):
                raise DataParseError(f"{path}: bad defect count in row {lineno}", lineno)
            rows.append(values)
            bugs.append(int(bug))
    if not rows:
        raise EmptyDatasetError(f"{path}: no data rows")
    return Dataset(name or path.stem, np.array(rows), np.array(bugs), None, schema)


def write_csv(ds: Dataset, path: str | Path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(list(ds.schema) + [BUG_COLUMN])
        for row, bug in zip(ds.X, ds.bugs):
            w.writerow([_fmt(v) for v in row] + [int(bug)])


def _fmt(v: float) -> str:
    return str(int(v)) if float(v).is_integer() else repr(float(v))


def binarize(ds: Dataset, T: int = 1) -> Dataset:
    """Label a row defective when its defect count is at least ``T``."""
    if T < 1:
        raise ValueError("T must be >= 1")
    return Dataset(ds.name, ds.X, ds.bugs, ds.bugs >= T, ds.schema)


def minmax(X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    lo = X.min(axis=0)
    span = X.max(axis=0) - lo
    out = np.zeros_like(X)
    ok = span > 0
    out[:, ok] = (X[:, ok] - lo[ok]) / span[ok]
    return out


def normalize_minmax(ds: Dataset) -> Dataset:
    """Map every metric column onto [0, 1]; constant columns become 0."""
    return Dataset(ds.name, minmax(ds.X), ds.bugs, ds.labels, ds.schema)


def concat(datasets: Sequence[Dataset], name: str) -> Dataset:
    schema = datasets[0].schema
    if any(d.schema != schema for d in datasets):
        raise SchemaError("cannot concatenate datasets with different schemas")
    labels = None
    if all(d.labels is not None for d in datasets):
        labels = np.concatenate([d.labels for d in datasets])
    return Dataset(
        name,
        np.vstack([d.X for d in datasets]),
        np.concatenate([d.bugs for d in datasets]),
        labels,
        schema,
    )


@dataclass(frozen=True)
class ReleaseTriplet:
    name: str
    train: Dataset
    tune: Dataset
    test: Dataset

    def __post_init__(self):
        parts = (self.train, self.tune, self.test)
        if len({id(p) for p in parts}) != 3:
            raise DatasetError(f"{self.name}: train/tune/test must be distinct datasets")
        if len({p.schema for p in parts}) != 1:
            raise SchemaError(f"{self.name}: releases have different schemas")

    def __iter__(self):
        return iter((self.train, self.tune, self.test))

    def counts(self) -> tuple[tuple[int, int], ...]:
        return tuple((d.defective_count, len(d)) for d in self)


@dataclass
class Manifest:
    """Triplet name -> (train, tune, test) CSV paths, plus the binarization threshold."""

    triplets: dict[str, tuple[Path, Path, Path]]
    threshold: int = 1
    ignore_columns: tuple[str, ...] = ()
    path: Path | None = None
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @classmethod
    def load(cls, path: str | Path) -> "Manifest":
        path = Path(path)
        raw = json.loads(path.read_text(encoding="utf-8"))
        if not isinstance(raw, dict):
            raise DatasetError(f"{path}: manifest must be a JSON object")
        body = raw.get("triplets", raw)
        threshold = int(raw.get("threshold", 1)) if "triplets" in raw else 1
        ignore = tuple(raw.get("ignore_columns", ())) if "triplets" in raw else ()
        base = path.parent
        triplets = {}
        for name, entry in body.items():
            try:
                files = tuple(base / entry[k] for k in ("train", "tune", "test"))
            except (KeyError, TypeError):
                raise DatasetError(f"{path}: triplet {name!r} needs train/tune/test paths") from None
            triplets[name] = files
        if not triplets:
            raise DatasetError(f"{path}: manifest lists no triplets")
        return cls(triplets, threshold, ignore, path)

    @property
    def names(self) -> list[str]:
        return list(self.triplets)

    def _load(self, p: Path) -> Dataset:
        if p not in self._cache:
            self._cache[p] = binarize(load_csv(p, ignore_columns=self.ignore_columns), self.threshold)
        return self._cache[p]

    def triplet(self, name: str) -> ReleaseTriplet:
        try:
            files = self.triplets[name]
        except KeyError:
            raise DatasetError(f"unknown triplet {name!r}") from None
        train, tune, test = (self._load(p) for p in files)
        return ReleaseTriplet(name, train, tune, test)

    def load_all(self) -> list[ReleaseTriplet]:
        return [self.triplet(n) for n in self.triplets]


def bundled_manifest_path() -> Path:
    return Path(__file__).parent / "data" / "manifest.json"


def load_bundled() -> Manifest:
    return Manifest.load(bundled_manifest_path())
