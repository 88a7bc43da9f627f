import json
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from defecttune import _tree
from defecttune.dataset import METRICS, Dataset, SchemaError, load_bundled
from defecttune.learner import (
    Tree,
    TrainedModel,
    _mix,
    predict,
    predict_scores,
    split_score,
    train,
    train_cart,
    train_rf,
)
from defecttune.params import CART, RF, CART_SPACE, RF_SPACE, ParamVector


@pytest.fixture(scope="module")
def ant():
    return load_bundled().triplet("antV0")


def _labelled(X, y, schema=None):
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=bool)
    schema = schema or METRICS[: X.shape[1]]
    return Dataset("toy", X, y.astype(int), y, schema)


# -- split_score -------------------------------------------------------------

def test_split_score_examples():
    assert split_score([(7, 0.0)]) == 0.0
    assert split_score([(50, 1.0), (50, 4.0)]) == pytest.approx(1.5)
    assert split_score([(10, 0.0), (90, 0.0)]) == 0.0
    with pytest.raises(ValueError):
        split_score([])


def test_split_score_matches_raw_label_recomputation():
    rng = np.random.default_rng(7)
    for _ in range(1000):
        k = rng.integers(1, 5)
        children = [rng.integers(0, 2, rng.integers(1, 30)) for _ in range(k)]
        total = sum(len(c) for c in children)
        brute = 0.0
        for c in children:
            mean = sum(c) / len(c)
            var = sum((v - mean) ** 2 for v in c) / len(c)
            brute += var ** 0.5 * len(c) / total
        got = split_score([(len(c), float(np.var(c))) for c in children])
        assert got == pytest.approx(brute, abs=1e-12)
        if k == 2:
            a, b = children
            kernel = _tree.split_cost(len(a), float(a.sum()), len(b), float(b.sum()))
            assert kernel == pytest.approx(brute, abs=1e-12)


# -- CART --------------------------------------------------------------------

def test_separable_two_rows_one_split():
    ds = _labelled([[0.0], [1.0]], [False, True])
    m = train_cart(ds, ParamVector.default(CART), seed=1)
    tree = m.trees[0]
    assert tree.node_count == 3 and tree.n_leaves == 2
    assert predict(m, ds).tolist() == [False, True]


def test_max_depth_one_caps_depth(ant):
    m = train_cart(ant.train, ParamVector(CART, max_depth=1), seed=0)
    assert m.trees[0].max_depth <= 1


def test_cart_deterministic_structure(ant):
    sigs = {train_cart(ant.train, ParamVector.default(CART), 42).trees[0].signature() for _ in range(10)}
    assert len(sigs) == 1
    sub = ParamVector(CART, max_feature=0.3)
    sigs = {train_cart(ant.train, sub, 42).trees[0].signature() for _ in range(10)}
    assert len(sigs) == 1


def test_single_row_is_single_leaf():
    ds = _labelled([[3.0, 1.0]], [True])
    m = train_cart(ds, ParamVector.default(CART), 0)
    assert m.trees[0].node_count == 1
    assert predict(m, ds).tolist() == [True]


def test_min_sample_split_allows_split_at_equal_count():
    ds = _labelled([[0.0], [1.0], [2.0], [3.0]], [False, False, True, True])
    assert train_cart(ds, ParamVector(CART, min_sample_split=4), 0).trees[0].n_leaves == 2
    assert train_cart(ds, ParamVector(CART, min_sample_split=5), 0).trees[0].n_leaves == 1


def test_min_samples_leaf_blocks_small_children():
    ds = _labelled([[0.0], [1.0], [2.0], [3.0]], [True, False, False, False])
    tree = train_cart(ds, ParamVector(CART, min_samples_leaf=2), 0).trees[0]
    assert tree.leaf_sizes.min() >= 2


def test_ties_break_on_lowest_attribute_then_threshold():
    # attributes 0 and 2 split identically; 1 is constant
    X = np.array([[0, 5, 0], [1, 5, 1], [2, 5, 2], [3, 5, 3]], dtype=float)
    ds = _labelled(X, [False, False, True, True])
    tree = train_cart(ds, ParamVector.default(CART), 0).trees[0]
    assert tree.feature[0] == 0
    assert tree.threshold[0] == pytest.approx(1.5)
    # equal-score thresholds on one attribute: lowest wins
    ds = _labelled([[0.0], [1.0], [2.0]], [True, False, True])
    tree = train_cart(ds, ParamVector(CART, max_depth=1), 0).trees[0]
    assert tree.threshold[0] == pytest.approx(0.5)


def test_max_feature_rounds_up_with_floor_of_one():
    p = ParamVector(CART, max_feature=0.01)
    assert p.n_features(20) == 1
    assert ParamVector(CART, max_feature=0.05).n_features(20) == 1
    assert ParamVector(CART, max_feature=0.06).n_features(20) == 2
    assert ParamVector(CART, max_feature=1.0).n_features(20) == 20
    assert ParamVector.default(CART).n_features(20) == 20


# -- Random Forest -------------------------------------------------------------

def test_rf_tree_count(ant):
    m = train_rf(ant.train, ParamVector(RF, n_estimators=50), 3)
    assert len(m.trees) == 50


def test_rf_single_leaf_predicts_bootstrap_rate(ant):
    seed = 11
    m = train_rf(ant.train, ParamVector(RF, max_leaf_nodes=1, n_estimators=50), seed)
    y = ant.train.y.astype(float)
    for t, tree in enumerate(m.trees):
        assert tree.node_count == 1
        rows = _tree.bootstrap(len(y), np.uint64(_mix(seed, t)))
        assert tree.value[0] == pytest.approx(y[rows].mean())


def test_rf_same_seed_same_scores(ant):
    p = ParamVector(RF, max_feature=0.2, max_leaf_nodes=12)
    a = predict_scores(train_rf(ant.train, p, 5), ant.test)
    b = predict_scores(train_rf(ant.train, p, 5), ant.test)
    np.testing.assert_array_equal(a, b)
    c = predict_scores(train_rf(ant.train, p, 6), ant.test)
    assert not np.array_equal(a, c)


def test_rf_deterministic_across_threads(ant):
    p = ParamVector(RF, max_feature=0.3, n_estimators=60)
    ref = predict_scores(train_rf(ant.train, p, 9), ant.tune)
    with ThreadPoolExecutor(4) as pool:
        outs = list(pool.map(lambda _: predict_scores(train_rf(ant.train, p, 9), ant.tune), range(4)))
    for o in outs:
        np.testing.assert_array_equal(o, ref)


def test_rf_best_first_leaf_cap(ant):
    m = train_rf(ant.train, ParamVector(RF, max_leaf_nodes=7), 1)
    assert all(t.n_leaves <= 7 for t in m.trees)
    assert max(t.n_leaves for t in m.trees) == 7


def test_rf_default_is_a_forest(ant):
    m = train(ant.train, ParamVector.default(RF), 0)
    assert len(m.trees) == 100 > 1


# -- predict -------------------------------------------------------------------

def _stump(value: float) -> Tree:
    tree = Tree(*(np.array([x]) for x in (-1, 0.0, -1, -1, value, 10, 0)))
    return tree


def _model(value, threshold, kind=CART):
    return TrainedModel(kind, (_stump(value),), threshold, 0, METRICS[:1], ParamVector.default(kind))


def test_predict_boundaries():
    ds = _labelled([[0.0], [1.0], [2.0]], [False, True, False])
    assert predict(_model(0.01, 0.0), ds).all()
    assert not predict(_model(0.99, 1.0), ds).any()
    assert predict(_model(0.5, 0.5), ds).all()


def test_predict_rejects_schema_mismatch(ant):
    m = train_cart(ant.train, ParamVector.default(CART), 0)
    other = Dataset("x", ant.test.X[:, :5], ant.test.bugs, ant.test.labels, METRICS[:5])
    with pytest.raises(SchemaError):
        predict(m, other)


def test_wrong_learner_kind_rejected(ant):
    with pytest.raises(ValueError):
        train_cart(ant.train, ParamVector.default(RF), 0)
    with pytest.raises(ValueError):
        train_rf(ant.train, ParamVector.default(CART), 0)


def test_model_json_dump(ant):
    m = train_cart(ant.train, ParamVector(CART, max_depth=2), 0)
    d = json.loads(m.dump_json())
    assert d["kind"] == "CART" and len(d["trees"]) == 1
    assert "attribute" in d["trees"][0] or "leaf_fraction" in d["trees"][0]


# -- structural invariants -------------------------------------------------------

def _check_caps(model, p, n_rows):
    for tree in model.trees:
        if p.max_depth is not None and p.learner_kind == CART:
            assert tree.max_depth <= p.max_depth
        if p.max_leaf_nodes is not None and p.learner_kind == RF:
            assert tree.n_leaves <= p.max_leaf_nodes
        if tree.node_count > 1:
            assert tree.leaf_sizes.min() >= p.min_samples_leaf
            internal = ~tree.is_leaf
            assert tree.n_node[internal].min() >= p.min_sample_split
        assert tree.n_node[0] == n_rows


def _point(space, data):
    vals = [data.draw(st.floats(d.lo, d.hi) if d.kind == "real" else st.integers(int(d.lo), int(d.hi)))
            for d in space]
    return space.decode(vals)


@settings(max_examples=40, deadline=None)
@given(st.data())
def test_structural_caps_cart(ant, data):
    p = _point(CART_SPACE, data)
    _check_caps(train(ant.train, p, data.draw(st.integers(0, 2**32))), p, len(ant.train))


@settings(max_examples=15, deadline=None)
@given(st.data())
def test_structural_caps_rf(ant, data):
    p = _point(RF_SPACE, data)
    _check_caps(train(ant.train, p, data.draw(st.integers(0, 2**32))), p, len(ant.train))


@settings(max_examples=30, deadline=None)
@given(st.floats(0, 1), st.floats(0, 1), st.integers(0, 1000))
def test_threshold_monotonic(ant, t1, t2, seed):
    lo, hi = sorted((t1, t2))
    m = train_cart(ant.train, ParamVector(CART, max_feature=0.5), seed)
    scores = predict_scores(m, ant.test)
    assert np.count_nonzero(scores >= hi) <= np.count_nonzero(scores >= lo)
