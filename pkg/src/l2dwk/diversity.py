"""Pairwise diversity matrices, plain and kernel-weighted.

Disagreement counts samples where two classifiers differ in correctness;
double fault counts samples where both are wrong. Note that double fault
grows with *coincident* failure, so a larger value means less diverse
behaviour. The objective builders use it as written and offer a sign flip.
"""

import numpy as np

from .kernels import weighted_gram, weighted_ones_row

KINDS = ("disagreement", "double_fault")
_ALIASES = {"dis": "disagreement", "df": "double_fault"}


def diversity_kind(name):
    kind = _ALIASES.get(name, name)
    if kind not in KINDS:
        raise ValueError(f"unknown diversity kind {name!r}; expected dis or df")
    return kind


def _oracle(O):
    O = np.asarray(O, dtype=np.float64)
    if O.ndim != 2 or O.shape[0] < 1:
        raise ValueError("oracle matrix must be (N, L) with N >= 1")
    return O


def _sym(D):
    return 0.5 * (D + D.T)


def disagreement_matrix(O):
    """(N 1 - O^T O) / 2N: fraction of samples where i and j differ in correctness."""
    O = _oracle(O)
    n = O.shape[0]
    return _sym((n - O.T @ O) / (2.0 * n))


def double_fault_matrix(O):
    """(1 - O)^T (1 - O) / 4N: fraction of samples where i and j are both wrong."""
    O = _oracle(O)
    F = 1.0 - O
    return _sym(F.T @ F / (4.0 * O.shape[0]))


def kernel_disagreement(spec, alpha, O):
    """(1 - K_alpha(O^T O)) / 2."""
    return _sym(0.5 * (1.0 - weighted_gram(spec, alpha, O)))


def kernel_double_fault(spec, alpha, O):
    """[1 - R - R^T + K_alpha(O^T O)] / 4N, where every row of R is the weighted ones-row.

    The 1/4N factor is kept even though sum(alpha) = 1 already normalises the
    kernel sums, so this matrix is 1/N times the plain one for a linear kernel
    with c = 0 and uniform alpha.
    """
    O = _oracle(O)
    r = weighted_ones_row(spec, alpha, O)
    G = weighted_gram(spec, alpha, O)
    return _sym((1.0 - r[None, :] - r[:, None] + G) / (4.0 * O.shape[0]))


def div_value(w, D):
    w = np.asarray(w, dtype=np.float64)
    D = np.asarray(D, dtype=np.float64)
    if D.shape != (w.size, w.size):
        raise ValueError(f"diversity matrix shape {D.shape} does not match {w.size} weights")
    return float(w @ D @ w)
