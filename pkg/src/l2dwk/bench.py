"""Cross-validated comparison of weight-learning methods over a shared tree pool.

Per fold: train a pool on the training split, bootstrap a validation set from
the training split, learn weights with every requested method on the
validation predictions, and score the weighted vote on the test split.
"""

from __future__ import annotations

import csv
import io
import time
from dataclasses import dataclass, field

import numpy as np

from .dataset import bootstrap_indices, stratified_kfold
from .kernels import KernelSpec
from .optimizer import SolverOptions, solve_simplex_qp
from .oracle import accuracy_vector, ensemble_error, oracle_matrix
from .pool import pool_predict, train_pool
from .selftrain import L2DWKConfig, qpd_objective, run_l2dwk

BASELINES = ("uniform", "best", "majority", "qpd")
L2DWK_KERNELS = {"l2dwk-linear": "linear", "l2dwk-gauss": "gaussian", "l2dwk-poly": "polynomial"}
METHODS = BASELINES + tuple(L2DWK_KERNELS)
EFFECTIVE_WEIGHT = 1e-4


class BenchError(RuntimeError):
    pass


@dataclass(frozen=True)
class BenchSettings:
    folds: int = 10
    seed: int = 0
    n_trees: int = 301
    pool_method: str = "bagging"
    mtry: int | None = None
    max_depth: int | None = None
    min_leaf: int = 1
    lam: float = 0.5
    diversity: str = "disagreement"
    update: str = "hinge"
    kernel_c: float | None = None
    sigma: float = 1.0
    degree: int = 2
    max_iters: int = 50
    alpha_tolerance: float = 1e-6
    early_stop: bool = True
    df_negate: bool = False
    solver: SolverOptions = field(default_factory=SolverOptions)

    def kernel(self, kind):
        if kind == "linear":
            return KernelSpec.linear(0.0 if self.kernel_c is None else self.kernel_c)
        if kind == "gaussian":
            return KernelSpec.gaussian(self.sigma)
        return KernelSpec.polynomial(1.0 if self.kernel_c is None else self.kernel_c, self.degree)

    def l2dwk_config(self, kind):
        return L2DWKConfig(lam=self.lam, kernel=self.kernel(kind), diversity=self.diversity,
                           update=self.update, max_iters=self.max_iters,
                           alpha_tolerance=self.alpha_tolerance, early_stop=self.early_stop,
                           df_negate=self.df_negate, solver=self.solver)


def parse_methods(text):
    names = [m.strip() for m in text.split(",") if m.strip()]
    unknown = [m for m in names if m not in METHODS]
    if unknown or not names:
        raise ValueError(f"unknown method(s) {', '.join(unknown) or '(none)'}; valid methods: {', '.join(METHODS)}")
    return names


def uniform_weights(L):
    return np.full(L, 1.0 / L)


def best_single_weights(O):
    w = np.zeros(O.shape[1])
    w[int(np.argmax(accuracy_vector(O)))] = 1.0
    return w


def majority_weights(O):
    """Equal weights on the classifiers whose validation accuracy is at least the median."""
    P = accuracy_vector(O)
    keep = P >= np.median(P)
    return keep / keep.sum()


def learn_weights(method, preds, labels, n_classes, settings: BenchSettings):
    """Weights for one method on validation predictions; returns ``(w, info)``."""
    O = oracle_matrix(preds, labels)
    if method == "uniform":
        return uniform_weights(O.shape[1]), {}
    if method == "best":
        return best_single_weights(O), {}
    if method == "majority":
        return majority_weights(O), {}
    if method == "qpd":
        sol = solve_simplex_qp(qpd_objective(O, settings.lam, settings.diversity, settings.df_negate),
                               settings.solver)
        return sol.w, {"psd": sol.psd, "objective": sol.objective}
    if method in L2DWK_KERNELS:
        w, report = run_l2dwk(preds, labels, settings.l2dwk_config(L2DWK_KERNELS[method]), n_classes)
        return w, {"iterations": report.iterations, "stop_reason": report.stop_reason}
    raise ValueError(f"unknown method {method!r}")


def _derived(seed, *path):
    return int(np.random.SeedSequence([seed, *path]).generate_state(1)[0])


@dataclass
class BenchRow:
    dataset: str
    fold: int
    method: str
    test_accuracy: float
    effective_L: int
    train_seconds: float


@dataclass
class BenchResult:
    rows: list

    def report_csv(self):
        """Per-fold rows. Wall-clock time is left out so reruns are byte-identical."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["dataset", "fold", "method", "test_accuracy", "effective_L"])
        for r in self.rows:
            w.writerow([r.dataset, r.fold, r.method, repr(float(r.test_accuracy)), r.effective_L])
        return buf.getvalue()

    def timings_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["dataset", "fold", "method", "train_seconds"])
        for r in self.rows:
            w.writerow([r.dataset, r.fold, r.method, f"{r.train_seconds:.6f}"])
        return buf.getvalue()

    def aggregate(self):
        """{(dataset, method): dict(mean, std, mean_effective_L, mean_seconds, n)} in row order."""
        groups = {}
        for r in self.rows:
            groups.setdefault((r.dataset, r.method), []).append(r)
        out = {}
        for key, rs in groups.items():
            acc = np.array([r.test_accuracy for r in rs])
            out[key] = {
                "n": len(rs),
                "mean": float(acc.mean()),
                "std": float(acc.std(ddof=1)) if len(rs) > 1 else 0.0,
                "mean_effective_L": float(np.mean([r.effective_L for r in rs])),
                "mean_seconds": float(np.mean([r.train_seconds for r in rs])),
            }
        return out

    def summary_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["dataset", "method", "folds", "mean_accuracy", "std_accuracy", "mean_effective_L"])
        for (ds, m), a in self.aggregate().items():
            w.writerow([ds, m, a["n"], repr(a["mean"]), repr(a["std"]), repr(a["mean_effective_L"])])
        return buf.getvalue()

    def table(self):
        lines = [f"{'dataset':<16} {'method':<14} {'mean acc':>9} {'std':>8} {'eff. L':>7} {'sec':>8}"]
        for (ds, m), a in self.aggregate().items():
            lines.append(f"{ds:<16} {m:<14} {a['mean']:>9.4f} {a['std']:>8.4f} "
                         f"{a['mean_effective_L']:>7.1f} {a['mean_seconds']:>8.3f}")
        return "\n".join(lines)


def run_bench(datasets, methods, settings: BenchSettings, log=None) -> BenchResult:
    """``datasets`` is a list of ``(name, Dataset)``; rows come out ordered by (dataset, fold, method)."""
    for m in methods:
        if m not in METHODS:
            raise ValueError(f"unknown method {m!r}; valid methods: {', '.join(METHODS)}")
    rows = []
    for name, ds in datasets:
        plan = stratified_kfold(ds, settings.folds, settings.seed)
        for fold, train_idx, test_idx in plan.splits():
            train = ds.subset(train_idx)
            test = ds.subset(test_idx)
            pool = train_pool(train, settings.n_trees, settings.pool_method, settings.mtry,
                              seed=_derived(settings.seed, fold, 0),
                              max_depth=settings.max_depth, min_leaf=settings.min_leaf)
            val_idx = bootstrap_indices(train.n_samples, _derived(settings.seed, fold, 1))
            val_preds = pool_predict(pool, train.features[val_idx])
            val_labels = train.labels[val_idx]
            test_preds = pool_predict(pool, test)
            for method in methods:
                start = time.perf_counter()
                try:
                    w, _ = learn_weights(method, val_preds, val_labels, ds.class_count, settings)
                except Exception as e:
                    raise BenchError(f"method {method} failed on dataset {name}, fold {fold}: {e}") from e
                seconds = time.perf_counter() - start
                acc = 1.0 - ensemble_error(test_preds, test.labels, w, ds.class_count)
                rows.append(BenchRow(name, fold, method, acc, int((w > EFFECTIVE_WEIGHT).sum()), seconds))
                if log:
                    log(f"{name} fold {fold} {method}: acc={acc:.4f} ({seconds:.2f}s)")
    return BenchResult(rows)


def recompute_means(report_text):
    """Mean test accuracy per (dataset, method), read back from a report CSV."""
    sums = {}
    for row in csv.DictReader(io.StringIO(report_text)):
        key = (row["dataset"], row["method"])
        s, n = sums.get(key, (0.0, 0))
        sums[key] = (s + float(row["test_accuracy"]), n + 1)
    return {k: s / n for k, (s, n) in sums.items()}

