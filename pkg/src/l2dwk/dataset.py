"""Tabular classification datasets: CSV loading, stratified folds, bootstrap, blobs.

Categorical columns (features and labels alike) are encoded ordinally by first
appearance. The original strings are kept on the :class:`Dataset` so codes can
be decoded again.
"""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass, field

import numpy as np

MISSING_TOKENS = frozenset({"", "?"})


class DatasetError(ValueError):
    """Raised for malformed input files or invalid dataset operations."""


def _frozen(a):
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Dataset:
    features: np.ndarray
    labels: np.ndarray
    class_count: int
    feature_names: list[str]
    # feature index -> code-ordered category strings, for categorical columns only
    categories: dict[int, list[str]] = field(default_factory=dict)
    class_names: list[str] | None = None

    def __post_init__(self):
        X = np.asarray(self.features, dtype=np.float64)
        y = np.asarray(self.labels, dtype=np.int64)
        if X.ndim != 2:
            raise DatasetError("features must be a 2-d array")
        n, d = X.shape
        if n < 1 or d < 1:
            raise DatasetError(f"dataset must have N >= 1 and d >= 1, got {X.shape}")
        if y.shape != (n,):
            raise DatasetError(f"labels shape {y.shape} does not match N={n}")
        if self.class_count < 2:
            raise DatasetError("class_count must be >= 2")
        if y.min() < 0 or y.max() >= self.class_count:
            raise DatasetError("label index outside [0, class_count)")
        if np.isnan(X).any():
            raise DatasetError("features contain NaN")
        if len(self.feature_names) != d:
            raise DatasetError("feature_names length does not match d")
        object.__setattr__(self, "features", _frozen(X))
        object.__setattr__(self, "labels", _frozen(y))
        object.__setattr__(self, "feature_names", list(self.feature_names))

    @property
    def n_samples(self):
        return self.features.shape[0]

    @property
    def n_features(self):
        return self.features.shape[1]

    def subset(self, indices) -> Dataset:
        idx = np.asarray(indices, dtype=np.int64)
        return Dataset(self.features[idx], self.labels[idx], self.class_count,
                       self.feature_names, self.categories, self.class_names)

    def decode_feature(self, j):
        """Column ``j`` as original values (strings for categorical columns)."""
        col = self.features[:, j]
        if j in self.categories:
            cats = self.categories[j]
            return [cats[int(v)] for v in col]
        return col.tolist()

    def decode_labels(self):
        if self.class_names is None:
            return self.labels.tolist()
        return [self.class_names[i] for i in self.labels]


@dataclass(frozen=True)
class FoldPlan:
    fold_of: np.ndarray
    k: int
    seed: int

    def __post_init__(self):
        object.__setattr__(self, "fold_of", _frozen(np.asarray(self.fold_of, dtype=np.int64)))

    def test_indices(self, fold):
        return np.flatnonzero(self.fold_of == fold)

    def train_indices(self, fold):
        return np.flatnonzero(self.fold_of != fold)

    def splits(self):
        for f in range(self.k):
            yield f, self.train_indices(f), self.test_indices(f)


def _is_number(s):
    try:
        v = float(s)
    except ValueError:
        return False
    return math.isfinite(v)


def _resolve_column(selector, header, ncols):
    if isinstance(selector, str) and not selector.lstrip("-").isdigit():
        if header is None or selector not in header:
            raise DatasetError(f"label column {selector!r} not found in header")
        return header.index(selector)
    idx = int(selector)
    if not -ncols <= idx < ncols:
        raise DatasetError(f"label column {idx} out of range for {ncols} columns")
    return idx % ncols


def load_csv(path, label_column=-1, header=None) -> Dataset:
    """Load a comma-separated file into a :class:`Dataset`.

    Parameters
    ----------
    path : str or path-like
    label_column : int or str
        Column index (negative counts from the end) or header name.
    header : bool or None
        ``None`` detects a header: the first line is a header when some
        column is non-numeric there but numeric on every later row.

    Raises
    ------
    OSError
        If the file cannot be read.
    DatasetError
        Empty file, ragged rows, missing values, or a column mixing numeric
        and non-numeric values. Messages carry 1-based file line numbers.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [(i + 1, [c.strip() for c in r]) for i, r in enumerate(csv.reader(fh))]
    rows = [(ln, r) for ln, r in rows if r and any(c for c in r)]
    if not rows:
        raise DatasetError(f"{path}: empty file")

    ncols = len(rows[0][1])
    for ln, r in rows:
        if len(r) != ncols:
            raise DatasetError(f"{path}: ragged row at line {ln}: expected {ncols} fields, got {len(r)}")
    if ncols < 2:
        raise DatasetError(f"{path}: need at least one feature column and a label column")

    if header is None:
        first = rows[0][1]
        rest = [r for _, r in rows[1:]]
        header = bool(rest) and any(
            not _is_number(first[j]) and first[j] not in MISSING_TOKENS
            and all(_is_number(r[j]) for r in rest)
            for j in range(ncols)
        )
    names = None
    if header:
        names = rows[0][1]
        rows = rows[1:]
        if not rows:
            raise DatasetError(f"{path}: header but no data rows")

    label_idx = _resolve_column(label_column, names, ncols)

    for ln, r in rows:
        for j, v in enumerate(r):
            if v in MISSING_TOKENS:
                raise DatasetError(f"{path}: missing value at line {ln}, column {j + 1}")

    columns = []
    categories = {}
    feat_names = []
    for j in range(ncols):
        if j == label_idx:
            continue
        values = [r[j] for _, r in rows]
        numeric = [_is_number(v) for v in values]
        fj = len(feat_names)
        feat_names.append(names[j] if names else f"x{j}")
        if all(numeric):
            columns.append(np.array([float(v) for v in values]))
        elif not any(numeric):
            codes, cats = _encode(values)
            columns.append(codes.astype(np.float64))
            categories[fj] = cats
        else:
            # column kind is set by its first data row
            bad = numeric.index(not numeric[0])
            raise DatasetError(
                f"{path}: column {j + 1} mixes numeric and non-numeric values "
                f"(line {rows[bad][0]}: {values[bad]!r})")

    labels, class_names = _encode([r[label_idx] for _, r in rows])
    return Dataset(
        features=np.column_stack(columns),
        labels=labels,
        class_count=max(2, len(class_names)),
        feature_names=feat_names,
        categories=categories,
        class_names=class_names,
    )


def _encode(values):
    table = {}
    codes = np.empty(len(values), dtype=np.int64)
    for i, v in enumerate(values):
        codes[i] = table.setdefault(v, len(table))
    return codes, list(table)


def save_csv(ds: Dataset, path):
    """Write ``ds`` with a header row; categorical codes are decoded back to strings."""
    from ._io import atomic_write_text
    import io

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(ds.feature_names + ["label"])
    cols = [ds.decode_feature(j) for j in range(ds.n_features)]
    for i, lab in enumerate(ds.decode_labels()):
        w.writerow([_fmt(c[i]) for c in cols] + [lab])
    atomic_write_text(path, buf.getvalue())


def _fmt(v):
    return repr(float(v)) if isinstance(v, float) else str(v)


def stratified_kfold(ds: Dataset, k: int, seed: int) -> FoldPlan:
    """Assign every sample to one of ``k`` folds, stratified by class.

    Within each class the samples are shuffled and dealt round-robin; the
    dealing position carries over from one class to the next, so fold sizes
    differ by at most one overall as well as per class.
    """
    n = ds.n_samples
    if not 2 <= k <= n:
        raise DatasetError(f"k must satisfy 2 <= k <= N={n}, got {k}")
    counts = np.bincount(ds.labels, minlength=ds.class_count)
    if (counts == 0).any():
        raise DatasetError(f"classes with zero instances: {np.flatnonzero(counts == 0).tolist()}")
    rng = np.random.default_rng(seed)
    fold_of = np.empty(n, dtype=np.int64)
    pos = 0
    for c in range(ds.class_count):
        idx = rng.permutation(np.flatnonzero(ds.labels == c))
        fold_of[idx] = (pos + np.arange(idx.size)) % k
        pos = (pos + idx.size) % k
    return FoldPlan(fold_of, k, seed)


def bootstrap_indices(n, seed):
    if n < 1:
        raise DatasetError("bootstrap needs N >= 1")
    return np.random.default_rng(seed).integers(0, n, size=n)


def bootstrap(ds: Dataset, seed: int) -> Dataset:
    """Resample N rows uniformly with replacement."""
    return ds.subset(bootstrap_indices(ds.n_samples, seed))


def make_blobs(n_per_class, centers, spread, seed) -> Dataset:
    """Isotropic Gaussian clusters, one class per center, classes in center order."""
    centers = np.atleast_2d(np.asarray(centers, dtype=np.float64))
    if centers.shape[0] < 2:
        raise DatasetError("make_blobs needs at least 2 centers")
    if spread <= 0:
        raise DatasetError("spread must be positive")
    if n_per_class < 1:
        raise DatasetError("n_per_class must be >= 1")
    rng = np.random.default_rng(seed)
    n_centers, d = centers.shape
    X = np.concatenate([c + spread * rng.standard_normal((n_per_class, d)) for c in centers])
    y = np.repeat(np.arange(n_centers), n_per_class)
    return Dataset(X, y, n_centers, [f"x{j}" for j in range(d)],
                   class_names=[str(c) for c in range(n_centers)])


def dataset_name(path):
    return os.path.splitext(os.path.basename(os.fspath(path)))[0]
