import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from defecttune import surrogate
from defecttune.dataset import (
    METRICS,
    TRIPLET_COUNTS,
    DataParseError,
    Dataset,
    DatasetError,
    EmptyDatasetError,
    Manifest,
    ReleaseTriplet,
    SchemaError,
    binarize,
    bundled_manifest_path,
    load_bundled,
    load_csv,
    normalize_minmax,
    write_csv,
)

HEADER = ",".join(METRICS) + ",bug\n"


def _row(values=None, bug=0):
    values = values or [1] * len(METRICS)
    return ",".join(str(v) for v in values) + f",{bug}\n"


def _ds(X, bugs=None, name="t"):
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    schema = METRICS[: X.shape[1]]
    bugs = np.zeros(len(X), dtype=int) if bugs is None else bugs
    return Dataset(name, X, bugs, None, schema)


def test_load_antv0_training_release():
    m = load_bundled()
    ds = load_csv(m.triplets["antV0"][0])
    assert len(ds) == 125
    assert ds.defective_count == 20
    assert ds.schema == METRICS


def test_header_only_is_empty(tmp_path):
    p = tmp_path / "empty.csv"
    p.write_text(HEADER)
    with pytest.raises(EmptyDatasetError):
        load_csv(p)


def test_non_numeric_cell_names_row(tmp_path):
    p = tmp_path / "bad.csv"
    vals = [1] * len(METRICS)
    vals[METRICS.index("loc")] = "abc"
    p.write_text(HEADER + _row() + _row(vals))
    with pytest.raises(DataParseError) as err:
        load_csv(p)
    assert err.value.row == 3
    assert "row 3" in str(err.value)


@pytest.mark.parametrize(
    "header",
    [
        ",".join(METRICS[:-1]) + ",bug\n",            # missing column
        ",".join(METRICS) + ",extra,bug\n",           # extra column
        ",".join(reversed(METRICS)) + ",bug\n",       # wrong order
        ",".join(METRICS) + "\n",                     # no bug column
    ],
)
def test_schema_errors(tmp_path, header):
    p = tmp_path / "x.csv"
    p.write_text(header + "1," * (header.count(",")) + "0\n")
    with pytest.raises(SchemaError):
        load_csv(p)


def test_ignored_columns_and_order_preserved(tmp_path):
    p = tmp_path / "promise.csv"
    header = "name,version," + ",".join(METRICS) + ",bug\n"
    rows = [f"a.B{i},1.0," + _row([i] * len(METRICS), bug=i % 3) for i in range(4)]
    p.write_text(header + "".join(rows))
    ds = load_csv(p, ignore_columns=("name", "version"))
    assert ds.bugs.tolist() == [0, 1, 2, 0]
    assert ds.X[:, 0].tolist() == [0, 1, 2, 3]


def test_round_trip(tmp_path):
    ds = load_csv(load_bundled().triplets["ivy"][0])
    write_csv(ds, tmp_path / "copy.csv")
    back = load_csv(tmp_path / "copy.csv")
    np.testing.assert_array_equal(back.X, ds.X)
    np.testing.assert_array_equal(back.bugs, ds.bugs)


def test_binarize_threshold_uses_ge():
    ds = _ds(np.zeros(4), bugs=np.array([0, 1, 2, 3]))
    assert binarize(ds, 1).labels.tolist() == [False, True, True, True]
    assert binarize(ds, 2).labels.tolist() == [False, False, True, True]
    with pytest.raises(ValueError):
        binarize(ds, 0)


def test_binarize_antv0_has_20_yes():
    ds = binarize(load_csv(load_bundled().triplets["antV0"][0]), 1)
    assert int(ds.labels.sum()) == 20


@given(st.lists(st.integers(0, 10), min_size=1, max_size=30), st.integers(1, 5))
def test_binarize_idempotent_and_order_preserving(bugs, T):
    ds = _ds(np.arange(len(bugs)), bugs=np.array(bugs))
    once = binarize(ds, T)
    twice = binarize(once, T)
    np.testing.assert_array_equal(once.labels, twice.labels)
    np.testing.assert_array_equal(once.X, ds.X)
    assert [i.label for i in once] == [b >= T for b in bugs]


@pytest.mark.parametrize(
    "column, expected",
    [([2, 4, 6], [0, 0.5, 1]), ([5, 5, 5], [0, 0, 0]), ([0, 1], [0, 1])],
)
def test_normalize_examples(column, expected):
    out = normalize_minmax(_ds(column))
    np.testing.assert_allclose(out.X[:, 0], expected)


@settings(max_examples=60)
@given(arrays(np.float64, st.tuples(st.integers(2, 15), st.integers(1, 4)),
              elements=st.floats(-1e6, 1e6, allow_nan=False)))
def test_normalize_range_and_idempotence(X):
    once = normalize_minmax(_ds(X))
    assert np.all(once.X >= 0) and np.all(once.X <= 1)
    twice = normalize_minmax(once)
    varying = np.ptp(X, axis=0) > 0
    np.testing.assert_allclose(twice.X[:, varying], once.X[:, varying], atol=1e-9)


def test_dataset_rejects_non_finite():
    with pytest.raises(DataParseError):
        _ds([1.0, np.nan])


def test_dataset_is_read_only():
    ds = _ds([1.0, 2.0])
    with pytest.raises(ValueError):
        ds.X[0, 0] = 5


def test_bundled_fixtures_match_release_counts():
    m = load_bundled()
    assert len(m.triplets) == 17
    for t in m.load_all():
        assert t.counts() == TRIPLET_COUNTS[t.name]


def test_bundled_fixtures_regenerate_identically(tmp_path):
    surrogate.write_fixtures(tmp_path)
    bundled = bundled_manifest_path().parent
    for stem in surrogate.RELEASES:
        assert (tmp_path / f"{stem}.csv").read_bytes() == (bundled / f"{stem}.csv").read_bytes()
    assert json.loads((tmp_path / "manifest.json").read_text()) == json.loads(
        bundled_manifest_path().read_text()
    )


def test_manifest_threshold_and_relative_paths(tmp_path):
    bundled = bundled_manifest_path().parent
    for stem in ("ivy-1.1", "ivy-1.4", "ivy-2.0"):
        (tmp_path / f"{stem}.csv").write_bytes((bundled / f"{stem}.csv").read_bytes())
    (tmp_path / "m.json").write_text(json.dumps({
        "threshold": 2,
        "triplets": {"ivy": {"train": "ivy-1.1.csv", "tune": "ivy-1.4.csv", "test": "ivy-2.0.csv"}},
    }))
    t = Manifest.load(tmp_path / "m.json").triplet("ivy")
    assert isinstance(t, ReleaseTriplet)
    np.testing.assert_array_equal(t.train.labels, t.train.bugs >= 2)


def test_manifest_flat_mapping(tmp_path):
    (tmp_path / "m.json").write_text(json.dumps({"x": {"train": "a", "tune": "b", "test": "c"}}))
    m = Manifest.load(tmp_path / "m.json")
    assert m.names == ["x"] and m.threshold == 1


def test_manifest_errors(tmp_path):
    (tmp_path / "m.json").write_text(json.dumps({"x": {"train": "a"}}))
    with pytest.raises(DatasetError):
        Manifest.load(tmp_path / "m.json")
    with pytest.raises(DatasetError):
        load_bundled().triplet("nope")


def test_triplet_requires_distinct_releases():
    ds = _ds([1.0, 2.0])
    with pytest.raises(DatasetError):
        ReleaseTriplet("x", ds, ds, _ds([3.0, 4.0]))
