"""Jitted tree growing and traversal kernels.

Trees are stored as parallel arrays indexed by node id; ``left[i] == -1``
marks a leaf. Randomness (per-split attribute subsampling) comes from a
splitmix64 stream owned by the call, so results never depend on global state.
"""
import numpy as np
from numba import njit

LEAF = -1


@njit(cache=True)
def _next_u64(state):
    state[0] += np.uint64(0x9E3779B97F4A7C15)
    z = state[0]
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


@njit(cache=True)
def _randbelow(state, n):
    return np.int64(_next_u64(state) % np.uint64(n))


@njit(cache=True)
def _sample_features(state, perm, k):
    # partial Fisher-Yates; consumes no randomness when all attributes are used
    p = perm.shape[0]
    for i in range(p):
        perm[i] = i
    if k >= p:
        return perm.copy()
    for i in range(k):
        j = i + _randbelow(state, p - i)
        t = perm[i]
        perm[i] = perm[j]
        perm[j] = t
    return np.sort(perm[:k])


@njit(cache=True)
def split_cost(n_left, pos_left, n_right, pos_right):
    """Size-weighted root-variance of the two children's binary labels."""
    pl = pos_left / n_left
    pr = pos_right / n_right
    n = n_left + n_right
    return (n_left * np.sqrt(pl * (1.0 - pl)) + n_right * np.sqrt(pr * (1.0 - pr))) / n


@njit(cache=True)
def _best_split(X, y, rows, start, end, features, min_leaf):
    m = end - start
    vals = np.empty(m)
    labs = np.empty(m)
    total = 0.0
    for i in range(m):
        total += y[rows[start + i]]
    best_cost = np.inf
    best_f = -1
    best_t = 0.0
    for fi in range(features.shape[0]):
        f = features[fi]
        for i in range(m):
            vals[i] = X[rows[start + i], f]
        order = np.argsort(vals, kind="mergesort")
        for i in range(m):
            labs[i] = y[rows[start + order[i]]]
        cum = 0.0
        for i in range(m - 1):
            cum += labs[i]
            a = vals[order[i]]
            b = vals[order[i + 1]]
            if a >= b:
                continue
            nl = i + 1
            nr = m - nl
            if nl < min_leaf or nr < min_leaf:
                continue
            c = split_cost(nl, cum, nr, total - cum)
            # strict improvement keeps the lowest attribute, then lowest threshold
            if c < best_cost - 1e-12:
                best_cost = c
                best_f = f
                best_t = 0.5 * (a + b)
                if best_t >= b:  # midpoint rounding collapse on adjacent floats
                    best_t = a
    return best_f, best_t, best_cost


@njit(cache=True)
def grow(X, y, rows, max_features, min_split, min_leaf, max_depth, max_leaves, seed):
    """Grow one tree on ``X[rows]``.

    ``max_depth < 0`` and ``max_leaves <= 0`` mean unbounded. With a leaf
    cap, nodes are expanded best-first by weighted cost reduction; without
    one, depth-first. Returns (feature, threshold, left, right, value,
    n_node, depth) arrays trimmed to the node count.
    """
    n = rows.shape[0]
    p = X.shape[1]
    rows = rows.copy()
    state = np.empty(1, dtype=np.uint64)
    state[0] = np.uint64(seed)
    perm = np.empty(p, dtype=np.int64)

    cap = 2 * n + 1
    feature = np.full(cap, LEAF, dtype=np.int64)
    threshold = np.zeros(cap)
    left = np.full(cap, LEAF, dtype=np.int64)
    right = np.full(cap, LEAF, dtype=np.int64)
    value = np.zeros(cap)
    n_node = np.zeros(cap, dtype=np.int64)
    depth = np.zeros(cap, dtype=np.int64)
    start_of = np.zeros(cap, dtype=np.int64)
    end_of = np.zeros(cap, dtype=np.int64)
    # pending split per open node
    cand_f = np.full(cap, LEAF, dtype=np.int64)
    cand_t = np.zeros(cap)
    gain = np.zeros(cap)

    open_nodes = np.empty(cap, dtype=np.int64)
    n_open = 0
    n_nodes = 0
    n_leaves = 0

    # evaluate root
    node = 0
    n_nodes = 1
    n_leaves = 1
    start_of[0] = 0
    end_of[0] = n
    pending = np.empty(2, dtype=np.int64)
    pending[0] = 0
    n_pending = 1

    while True:
        for q in range(n_pending):
            node = pending[q]
            s = start_of[node]
            e = end_of[node]
            m = e - s
            pos = 0.0
            for i in range(s, e):
                pos += y[rows[i]]
            value[node] = pos / m
            n_node[node] = m
            v = value[node]
            splittable = (
                m >= min_split
                and m >= 2 * min_leaf
                and (max_depth < 0 or depth[node] < max_depth)
                and v > 0.0
                and v < 1.0
            )
            if splittable:
                feats = _sample_features(state, perm, max_features)
                f, t, c = _best_split(X, y, rows, s, e, feats, min_leaf)
                if f >= 0:
                    cand_f[node] = f
                    cand_t[node] = t
                    gain[node] = m * (np.sqrt(v * (1.0 - v)) - c)
                    open_nodes[n_open] = node
                    n_open += 1
        n_pending = 0

        if n_open == 0 or (max_leaves > 0 and n_leaves >= max_leaves):
            break
        if max_leaves > 0:
            pick = 0
            for i in range(1, n_open):
                if gain[open_nodes[i]] > gain[open_nodes[pick]] + 1e-12:
                    pick = i
        else:
            pick = n_open - 1
        node = open_nodes[pick]
        for i in range(pick, n_open - 1):
            open_nodes[i] = open_nodes[i + 1]
        n_open -= 1

        # stable partition of rows[s:e] on the chosen split
        s = start_of[node]
        e = end_of[node]
        f = cand_f[node]
        t = cand_t[node]
        tmp = np.empty(e - s, dtype=np.int64)
        k = 0
        for i in range(s, e):
            if X[rows[i], f] <= t:
                tmp[k] = rows[i]
                k += 1
        mid = s + k
        for i in range(s, e):
            if X[rows[i], f] > t:
                tmp[k] = rows[i]
                k += 1
        for i in range(e - s):
            rows[s + i] = tmp[i]

        feature[node] = f
        threshold[node] = t
        lc = n_nodes
        rc = n_nodes + 1
        n_nodes += 2
        n_leaves += 1
        left[node] = lc
        right[node] = rc
        for c, cs, ce in ((lc, s, mid), (rc, mid, e)):
            start_of[c] = cs
            end_of[c] = ce
            depth[c] = depth[node] + 1
        pending[0] = lc
        pending[1] = rc
        n_pending = 2

    return (
        feature[:n_nodes].copy(),
        threshold[:n_nodes].copy(),
        left[:n_nodes].copy(),
        right[:n_nodes].copy(),
        value[:n_nodes].copy(),
        n_node[:n_nodes].copy(),
        depth[:n_nodes].copy(),
    )


@njit(cache=True)
def apply(X, feature, threshold, left, right, value):
    out = np.empty(X.shape[0])
    for i in range(X.shape[0]):
        node = 0
        while left[node] != LEAF:
            if X[i, feature[node]] <= threshold[node]:
                node = left[node]
            else:
                node = right[node]
        out[i] = value[node]
    return out


@njit(cache=True)
def bootstrap(n, seed):
    state = np.empty(1, dtype=np.uint64)
    state[0] = np.uint64(seed)
    out = np.empty(n, dtype=np.int64)
    for i in range(n):
        out[i] = _randbelow(state, n)
    return out
