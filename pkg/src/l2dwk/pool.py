"""Bagging and random-subspace pools of CART trees, plus the pool text format.

Pool file grammar (version 1), one record per line, fields separated by a
single space::

    l2dwk-pool <version>
    method <bagging|random_subspace>
    seed <int>
    mtry <int>
    max_depth <int, -1 for unlimited>
    min_leaf <int>
    n_trees <L>
    n_classes <C>
    n_features <d>
    tree <index> <n_nodes>
    <feature> <threshold> <left> <right> <count_0> ... <count_{C-1}>   (n_nodes lines)
    ...
    end

Leaves have ``feature == -1``. Thresholds are written with ``repr`` so they
round-trip exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._io import atomic_write_text
from .dataset import Dataset, bootstrap_indices
from .trees import LEAF, DecisionTree, train_tree

FORMAT_MAGIC = "l2dwk-pool"
FORMAT_VERSION = 1
METHODS = ("bagging", "random_subspace")


class PoolFormatError(ValueError):
    pass


class PoolVersionError(PoolFormatError):
    pass


@dataclass(frozen=True)
class ClassifierPool:
    trees: tuple
    method: str
    seed: int
    mtry: int
    max_depth: int = -1
    min_leaf: int = 1

    def __post_init__(self):
        object.__setattr__(self, "trees", tuple(self.trees))
        if not self.trees:
            raise ValueError("a pool needs at least one tree")
        if self.method not in METHODS:
            raise ValueError(f"unknown pool method {self.method!r}")
        shapes = {(t.n_features, t.n_classes) for t in self.trees}
        if len(shapes) != 1:
            raise ValueError("all trees in a pool must share feature arity and class count")

    def __len__(self):
        return len(self.trees)

    @property
    def n_features(self):
        return self.trees[0].n_features

    @property
    def n_classes(self):
        return self.trees[0].n_classes


def default_mtry(method, d):
    return math.ceil(math.sqrt(d)) if method == "random_subspace" else 0


def tree_seed(seed, i):
    # per-index derivation: tree i is independent of how many trees precede it
    return np.random.SeedSequence([seed, i])


def train_pool(ds: Dataset, n_trees: int, method="bagging", mtry=None, seed=0,
               max_depth=None, min_leaf=1) -> ClassifierPool:
    """Train ``n_trees`` trees, each on its own bootstrap of ``ds``.

    ``random_subspace`` additionally subsamples ``mtry`` features per split
    (default ``ceil(sqrt(d))``); ``bagging`` always uses every feature.
    """
    if n_trees < 1:
        raise ValueError("n_trees must be >= 1")
    if method not in METHODS:
        raise ValueError(f"unknown pool method {method!r}; expected one of {METHODS}")
    if method == "bagging":
        mtry = 0
    elif mtry is None or mtry <= 0:
        mtry = default_mtry(method, ds.n_features)
    depth = -1 if max_depth is None or max_depth < 0 else int(max_depth)
    trees = []
    for i in range(n_trees):
        boot_seed, tree_rng_seed = tree_seed(seed, i).spawn(2)
        idx = bootstrap_indices(ds.n_samples, boot_seed)
        trees.append(train_tree(ds.features[idx], ds.labels[idx], ds.class_count,
                                max_depth=depth, min_leaf=min_leaf, mtry=mtry,
                                seed=tree_rng_seed))
    return ClassifierPool(trees, method, seed, mtry, depth, min_leaf)


def pool_predict(pool: ClassifierPool, X) -> np.ndarray:
    """N x L matrix of predicted class indices; column j comes from tree j."""
    if hasattr(X, "features"):
        X = X.features
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] == 0:
        raise ValueError("pool_predict needs a nonempty 2-d input")
    if X.shape[1] != pool.n_features:
        raise ValueError(f"pool expects {pool.n_features} features, got {X.shape[1]}")
    return np.column_stack([t.predict(X) for t in pool.trees])


def dumps_pool(pool: ClassifierPool) -> str:
    lines = [
        f"{FORMAT_MAGIC} {FORMAT_VERSION}",
        f"method {pool.method}",
        f"seed {pool.seed}",
        f"mtry {pool.mtry}",
        f"max_depth {pool.max_depth}",
        f"min_leaf {pool.min_leaf}",
        f"n_trees {len(pool)}",
        f"n_classes {pool.n_classes}",
        f"n_features {pool.n_features}",
    ]
    for i, t in enumerate(pool.trees):
        lines.append(f"tree {i} {t.n_nodes}")
        for k in range(t.n_nodes):
            cnt = " ".join(str(int(c)) for c in t.counts[k])
            lines.append(f"{t.feature[k]} {float(t.threshold[k])!r} {t.left[k]} {t.right[k]} {cnt}")
    lines.append("end")
    return "\n".join(lines) + "\n"


def save_pool(pool: ClassifierPool, path):
    atomic_write_text(path, dumps_pool(pool))


class _Lines:
    def __init__(self, text):
        self.lines = text.splitlines()
        self.pos = 0

    def next(self, what):
        if self.pos >= len(self.lines):
            raise PoolFormatError(f"unexpected end of file while reading {what}")
        self.pos += 1
        return self.lines[self.pos - 1].split()

    def field(self, key, cast=int):
        parts = self.next(key)
        if len(parts) != 2 or parts[0] != key:
            raise PoolFormatError(f"line {self.pos}: expected '{key} <value>'")
        try:
            return cast(parts[1])
        except ValueError:
            raise PoolFormatError(f"line {self.pos}: bad value for {key}: {parts[1]!r}") from None


def loads_pool(text: str) -> ClassifierPool:
    src = _Lines(text)
    head = src.next("header")
    if len(head) != 2 or head[0] != FORMAT_MAGIC:
        raise PoolFormatError("not a pool file (bad header)")
    if head[1] != str(FORMAT_VERSION):
        raise PoolVersionError(f"unsupported pool format version {head[1]!r}; this build reads {FORMAT_VERSION}")
    method = src.field("method", str)
    seed = src.field("seed")
    mtry = src.field("mtry")
    max_depth = src.field("max_depth")
    min_leaf = src.field("min_leaf")
    n_trees = src.field("n_trees")
    n_classes = src.field("n_classes")
    n_features = src.field("n_features")
    trees = []
    for i in range(n_trees):
        parts = src.next(f"tree {i}")
        if len(parts) != 3 or parts[0] != "tree" or parts[1] != str(i):
            raise PoolFormatError(f"line {src.pos}: expected 'tree {i} <n_nodes>'")
        n_nodes = int(parts[2])
        rows = []
        for _ in range(n_nodes):
            parts = src.next(f"node of tree {i}")
            if len(parts) != 4 + n_classes:
                raise PoolFormatError(f"line {src.pos}: expected {4 + n_classes} fields")
            try:
                rows.append((int(parts[0]), float(parts[1]), int(parts[2]), int(parts[3]),
                             [int(c) for c in parts[4:]]))
            except ValueError:
                raise PoolFormatError(f"line {src.pos}: malformed node record") from None
        tree = DecisionTree(
            feature=np.array([r[0] for r in rows], dtype=np.int64),
            threshold=np.array([r[1] for r in rows], dtype=np.float64),
            left=np.array([r[2] for r in rows], dtype=np.int64),
            right=np.array([r[3] for r in rows], dtype=np.int64),
            counts=np.array([r[4] for r in rows], dtype=np.int64).reshape(-1, n_classes),
            n_features=n_features,
        )
        _check_tree(tree, src.pos)
        trees.append(tree)
    if src.next("end marker") != ["end"]:
        raise PoolFormatError(f"line {src.pos}: expected 'end'")
    try:
        return ClassifierPool(trees, method, seed, mtry, max_depth, min_leaf)
    except ValueError as e:
        raise PoolFormatError(str(e)) from None


def _check_tree(t, lineno):
    n = t.n_nodes
    if n == 0:
        raise PoolFormatError(f"line {lineno}: tree with no nodes")
    internal = t.feature != LEAF
    if (t.feature[internal] >= t.n_features).any() or (t.feature < LEAF).any():
        raise PoolFormatError(f"line {lineno}: split feature out of range")
    kids = np.concatenate([t.left[internal], t.right[internal]])
    # children must come after their parent, which rules out cycles
    parents = np.concatenate([np.flatnonzero(internal)] * 2)
    if ((kids <= parents) | (kids >= n)).any() or np.unique(kids).size != kids.size:
        raise PoolFormatError(f"line {lineno}: invalid child links")
    if (t.counts[~internal].sum(axis=1) < 1).any():
        raise PoolFormatError(f"line {lineno}: leaf with empty class counts")


def load_pool(path) -> ClassifierPool:
    with open(path, encoding="utf-8") as fh:
        return loads_pool(fh.read())
