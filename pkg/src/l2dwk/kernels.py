"""Scalar kernels and their sample-weighted aggregates over an oracle matrix.

Kernels act on individual oracle entries, which are +1 or -1, so for a given
kernel only three values ever occur: k(1, 1), k(-1, -1) and k(1, -1). The
weighted aggregates are built from those three numbers and indicator matrix
products instead of looping over samples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .oracle import check_simplex

KINDS = ("linear", "gaussian", "polynomial")
_ALIASES = {"gauss": "gaussian", "rbf": "gaussian", "poly": "polynomial", "lin": "linear"}


@dataclass(frozen=True)
class KernelSpec:
    kind: str = "linear"
    c: float = 0.0
    sigma: float = 1.0
    degree: int = 2

    def __post_init__(self):
        kind = _ALIASES.get(self.kind, self.kind)
        object.__setattr__(self, "kind", kind)
        if kind not in KINDS:
            raise ValueError(f"unknown kernel {self.kind!r}; expected one of {KINDS}")
        if kind == "gaussian" and not self.sigma > 0:
            raise ValueError("gaussian kernel needs sigma > 0")
        if kind == "polynomial" and (int(self.degree) != self.degree or self.degree < 1):
            raise ValueError("polynomial kernel needs an integer degree >= 1")
        if not math.isfinite(self.c):
            raise ValueError("kernel constant c must be finite")

    @classmethod
    def linear(cls, c=0.0):
        return cls("linear", c=c)

    @classmethod
    def gaussian(cls, sigma=1.0):
        return cls("gaussian", sigma=sigma)

    @classmethod
    def polynomial(cls, c=1.0, degree=2):
        return cls("polynomial", c=c, degree=degree)

    def __call__(self, a, b):
        return kernel_eval(self, a, b)

    def as_dict(self):
        if self.kind == "linear":
            return {"kind": "linear", "c": self.c}
        if self.kind == "gaussian":
            return {"kind": "gaussian", "sigma": self.sigma}
        return {"kind": "polynomial", "c": self.c, "degree": int(self.degree)}


def kernel_eval(spec: KernelSpec, a, b):
    """k(a, b) for scalar (or broadcastable array) arguments."""
    if spec.kind == "linear":
        return a * b + spec.c
    if spec.kind == "gaussian":
        return np.exp(-((a - b) ** 2) / (2.0 * spec.sigma ** 2))
    return (a * b + spec.c) ** int(spec.degree)


def _table(spec):
    """(k(1,1), k(-1,-1), k(1,-1))."""
    return (float(kernel_eval(spec, 1.0, 1.0)), float(kernel_eval(spec, -1.0, -1.0)),
            float(kernel_eval(spec, 1.0, -1.0)))


def _check(alpha, O):
    O = np.asarray(O, dtype=np.float64)
    if O.ndim != 2:
        raise ValueError("oracle matrix must be (N, L)")
    alpha = check_simplex(alpha, "alpha")
    if alpha.size != O.shape[0]:
        raise ValueError(f"alpha has {alpha.size} entries for {O.shape[0]} samples")
    return alpha, O


def weighted_gram(spec: KernelSpec, alpha, O):
    """L x L matrix with entries sum_k alpha_k k(O_ki, O_kj)."""
    alpha, O = _check(alpha, O)
    kpp, kmm, kpm = _table(spec)
    right = (O > 0).astype(np.float64)
    wrong = 1.0 - right
    ar, aw = alpha[:, None] * right, alpha[:, None] * wrong
    cross = right.T @ aw
    G = kpp * (right.T @ ar) + kmm * (wrong.T @ aw) + kpm * (cross + cross.T)
    return 0.5 * (G + G.T)


def weighted_ones_row(spec: KernelSpec, alpha, O):
    """Length-L vector with entries sum_k alpha_k k(1, O_kj)."""
    alpha, O = _check(alpha, O)
    kpp, _, kpm = _table(spec)
    right = O > 0
    return kpp * (alpha @ right) + kpm * (alpha @ ~right)
