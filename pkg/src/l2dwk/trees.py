"""CART classification trees with Gini impurity.

A fitted tree is a flat node table. Internal nodes hold ``(feature,
threshold, left, right)``; leaves have ``feature == -1`` and carry per-class
training counts. Samples with ``x[feature] <= threshold`` go left.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

LEAF = -1


@dataclass(frozen=True)
class DecisionTree:
    feature: np.ndarray       # (n_nodes,) int, LEAF for leaves
    threshold: np.ndarray     # (n_nodes,) float
    left: np.ndarray          # (n_nodes,) int
    right: np.ndarray         # (n_nodes,) int
    counts: np.ndarray        # (n_nodes, C) int, zeros on internal nodes
    n_features: int

    @property
    def n_nodes(self):
        return self.feature.shape[0]

    @property
    def n_classes(self):
        return self.counts.shape[1]

    @property
    def root(self):
        return 0

    def depth(self):
        depth = np.zeros(self.n_nodes, dtype=np.int64)
        for i in range(self.n_nodes):
            if self.feature[i] != LEAF:
                depth[self.left[i]] = depth[self.right[i]] = depth[i] + 1
        return int(depth.max())

    def leaf_classes(self):
        # argmax takes the first maximum, i.e. ties go to the smaller class index
        return np.argmax(self.counts, axis=1)

    def predict(self, X):
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.n_features:
            raise ValueError(f"expected input with {self.n_features} features, got shape {X.shape}")
        node = np.zeros(X.shape[0], dtype=np.int64)
        active = self.feature[node] != LEAF
        rows = np.arange(X.shape[0])
        while active.any():
            r = rows[active]
            nd = node[r]
            go_left = X[r, self.feature[nd]] <= self.threshold[nd]
            node[r] = np.where(go_left, self.left[nd], self.right[nd])
            active = self.feature[node] != LEAF
        return self.leaf_classes()[node]


def predict_tree(tree: DecisionTree, x) -> int:
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (tree.n_features,):
        raise ValueError(f"expected a vector of {tree.n_features} features, got shape {x.shape}")
    return int(tree.predict(x[None, :])[0])


def _best_split(x, y, n_classes, min_leaf):
    """Best threshold on one feature: returns (weighted_gini, threshold) or None."""
    order = np.argsort(x, kind="stable")
    xs, ys = x[order], y[order]
    n = xs.size
    onehot = np.zeros((n, n_classes))
    onehot[np.arange(n), ys] = 1.0
    left = np.cumsum(onehot, axis=0)[:-1]           # counts with split after position i
    right = left[-1] + onehot[-1] - left
    n_left = np.arange(1, n, dtype=np.float64)
    n_right = n - n_left
    valid = (xs[1:] > xs[:-1]) & (n_left >= min_leaf) & (n_right >= min_leaf)
    if not valid.any():
        return None
    gini_l = n_left - (left ** 2).sum(axis=1) / n_left
    gini_r = n_right - (right ** 2).sum(axis=1) / n_right
    score = np.where(valid, (gini_l + gini_r) / n, np.inf)
    i = int(np.argmin(score))
    return float(score[i]), 0.5 * (xs[i] + xs[i + 1])


def train_tree(X, y=None, n_classes=None, max_depth=None, min_leaf=1, mtry=0, seed=0) -> DecisionTree:
    """Grow a CART tree greedily.

    Splits are made until a node is pure, ``max_depth`` is reached, or no
    threshold leaves ``min_leaf`` samples on both sides. A split is taken even
    when it does not lower the impurity (XOR-like data needs this at the root).
    With ``mtry > 0`` each node visits features in a seeded random order and
    evaluates up to ``mtry`` of them that admit a valid split.

    ``X`` may also be a :class:`~l2dwk.dataset.Dataset`, in which case ``y``
    and ``n_classes`` are taken from it when omitted.
    """
    if hasattr(X, "features"):
        ds = X
        X = ds.features
        y = ds.labels if y is None else y
        n_classes = ds.class_count if n_classes is None else n_classes
    if y is None or n_classes is None:
        raise ValueError("train_tree needs labels and a class count")
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if X.ndim != 2 or X.shape[0] < 1:
        raise ValueError("train_tree needs a nonempty 2-d feature matrix")
    if min_leaf < 1:
        raise ValueError("min_leaf must be >= 1")
    n, d = X.shape
    rng = np.random.default_rng(seed)
    limit = np.inf if max_depth is None or max_depth < 0 else max_depth

    feature, threshold, left, right, counts = [], [], [], [], []

    def new_node():
        feature.append(LEAF)
        threshold.append(0.0)
        left.append(LEAF)
        right.append(LEAF)
        counts.append(np.zeros(n_classes, dtype=np.int64))
        return len(feature) - 1

    stack = [(new_node(), np.arange(n), 0)]
    while stack:
        node, idx, depth = stack.pop()
        yi = y[idx]
        node_counts = np.bincount(yi, minlength=n_classes)
        best = None
        if depth < limit and np.count_nonzero(node_counts) > 1 and idx.size >= 2 * min_leaf:
            feats = rng.permutation(d) if mtry and mtry < d else np.arange(d)
            budget = mtry if mtry and mtry < d else d
            for f in feats:
                if budget == 0:
                    break
                cand = _best_split(X[idx, f], yi, n_classes, min_leaf)
                if cand is None:
                    continue
                budget -= 1
                if best is None or cand[0] < best[0]:
                    best = (cand[0], cand[1], int(f))
        if best is None:
            counts[node] = node_counts
            continue
        _, thr, f = best
        mask = X[idx, f] <= thr
        feature[node], threshold[node] = f, thr
        left[node] = new_node()
        right[node] = new_node()
        # right pushed first so the left subtree is numbered before it
        stack.append((right[node], idx[~mask], depth + 1))
        stack.append((left[node], idx[mask], depth + 1))

    return DecisionTree(
        feature=np.array(feature, dtype=np.int64),
        threshold=np.array(threshold, dtype=np.float64),
        left=np.array(left, dtype=np.int64),
        right=np.array(right, dtype=np.int64),
        counts=np.array(counts, dtype=np.int64).reshape(-1, n_classes),
        n_features=d,
    )
