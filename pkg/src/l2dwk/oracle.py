"""Oracle outputs, margins, signed accuracies and weighted voting.

Shapes follow one convention throughout: a prediction or oracle matrix is
``(N, L)`` with rows as samples and columns as base classifiers.
"""

import numpy as np

SIMPLEX_ATOL = 1e-9


def check_simplex(v, name="w", atol=SIMPLEX_ATOL):
    v = np.asarray(v, dtype=np.float64)
    if v.ndim != 1 or v.size == 0:
        raise ValueError(f"{name} must be a nonempty vector")
    if (v < -atol).any() or abs(v.sum() - 1.0) > atol:
        raise ValueError(f"{name} is not on the probability simplex (sum={v.sum():.12g}, min={v.min():.3g})")
    return v


def _check_preds(preds, labels):
    preds = np.asarray(preds)
    labels = np.asarray(labels)
    if preds.ndim != 2:
        raise ValueError("predictions must be an (N, L) matrix")
    if labels.shape != (preds.shape[0],):
        raise ValueError(f"labels shape {labels.shape} does not match {preds.shape[0]} prediction rows")
    return preds, labels


def oracle_matrix(preds, labels):
    """+1 where classifier j is right on sample i, -1 where it is wrong."""
    preds, labels = _check_preds(preds, labels)
    return np.where(preds == labels[:, None], 1.0, -1.0)


def margins(O, w):
    """Correct-minus-wrong weighted mass per sample."""
    O = np.asarray(O, dtype=np.float64)
    w = check_simplex(w)
    if O.ndim != 2 or O.shape[1] != w.size:
        raise ValueError(f"oracle matrix shape {O.shape} does not match {w.size} weights")
    return O @ w


def accuracy_vector(O):
    """Mean oracle output per classifier, in [-1, 1].

    This is the signed form; the usual accuracy in [0, 1] is ``(P + 1) / 2``.
    """
    O = np.asarray(O, dtype=np.float64)
    if O.ndim != 2 or O.shape[0] < 1:
        raise ValueError("accuracy_vector needs an (N, L) matrix with N >= 1")
    return O.mean(axis=0)


def vote_mass(preds, w, n_classes):
    """(N, C) matrix of summed weight voting for each class."""
    preds = np.atleast_2d(np.asarray(preds, dtype=np.int64))
    w = np.asarray(w, dtype=np.float64)
    return np.column_stack([(preds == c) @ w for c in range(n_classes)])


def weighted_votes(preds, w, n_classes=None):
    """Vectorised :func:`weighted_vote` over the rows of ``preds``."""
    preds = np.asarray(preds, dtype=np.int64)
    w = check_simplex(w)
    if preds.ndim != 2 or preds.shape[1] != w.size:
        raise ValueError(f"predictions shape {preds.shape} does not match {w.size} weights")
    if n_classes is None:
        n_classes = int(preds.max()) + 1
    # argmax returns the first maximum: ties go to the smaller class index
    return np.argmax(vote_mass(preds, w, n_classes), axis=1)


def weighted_vote(preds_row, w):
    """Class receiving the largest weighted vote, ties toward the smaller index."""
    row = np.asarray(preds_row, dtype=np.int64)
    return int(weighted_votes(row[None, :], w)[0])


def ensemble_errors(preds, labels, w, n_classes=None):
    """Boolean vector: True where the weighted vote misses the label."""
    preds, labels = _check_preds(preds, labels)
    if n_classes is None:
        n_classes = int(max(preds.max(), labels.max())) + 1
    return weighted_votes(preds, w, n_classes) != labels


def ensemble_error(preds, labels, w, n_classes=None):
    """Fraction of samples the weighted vote gets wrong."""
    return float(ensemble_errors(preds, labels, w, n_classes).mean())


def save_matrix_csv(path, M):
    """Dump an integer (N, L) matrix, rows are samples and columns classifiers."""
    from ._io import atomic_write_text

    M = np.asarray(M)
    if M.ndim != 2:
        raise ValueError("expected a 2-d matrix")
    text = "\n".join(",".join(str(int(v)) for v in row) for row in M) + "\n"
    atomic_write_text(path, text)


def load_matrix_csv(path):
    """Read a matrix written by :func:`save_matrix_csv` (or any integer CSV)."""
    rows = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                rows.append([int(float(v)) for v in line.split(",")])
            except ValueError:
                raise ValueError(f"{path}: non-numeric entry on line {lineno}") from None
            if len(rows[-1]) != len(rows[0]):
                raise ValueError(f"{path}: ragged row at line {lineno}")
    if not rows:
        raise ValueError(f"{path}: empty matrix file")
    return np.array(rows, dtype=np.int64)
