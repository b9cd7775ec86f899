"""Command-line entry point: ``l2dwk <command> ...``.

Exit codes: 0 success, 1 runtime failure, 2 usage error.
"""

import argparse
import logging
import sys

import numpy as np

from . import __version__
from ._io import atomic_write_text
from .bench import METHODS, BenchError, BenchSettings, learn_weights, parse_methods, run_bench
from .dataset import DatasetError, bootstrap_indices, dataset_name, load_csv, make_blobs, save_csv
from .optimizer import SolverOptions
from .oracle import ensemble_error, load_matrix_csv, save_matrix_csv
from .pool import METHODS as POOL_METHODS
from .pool import PoolFormatError, load_pool, pool_predict, save_pool, train_pool
from .selftrain import load_weights, run_l2dwk, save_weights

log = logging.getLogger("l2dwk")

KERNEL_CHOICES = {"linear": "linear", "gauss": "gaussian", "poly": "polynomial"}
COMBINE_METHODS = ("l2dwk", "qpd", "uniform", "best", "majority")


class UsageError(Exception):
    pass


def _label_column(text):
    try:
        return int(text)
    except ValueError:
        return text


def _load_data(args):
    return load_csv(args.data, label_column=args.label_column)


def _add_data_args(p, required=True):
    p.add_argument("--data", required=required, help="CSV data file")
    p.add_argument("--label-column", type=_label_column, default=-1,
                   help="label column index or header name (default: last column)")


def _add_tree_args(p):
    p.add_argument("--max-depth", type=int, default=-1, help="tree depth limit, -1 for unlimited")
    p.add_argument("--min-leaf", type=int, default=1)
    p.add_argument("--mtry", type=int, default=0,
                   help="features per split for random_subspace (0: ceil(sqrt(d)))")


def _add_learning_args(p):
    p.add_argument("--lambda", dest="lam", type=float, default=0.5, help="diversity weight (>= 0)")
    p.add_argument("--diversity", choices=("dis", "df"), default="dis")
    p.add_argument("--df-negate", action="store_true",
                   help="flip the sign of double-fault diversity (penalise coincident errors)")
    p.add_argument("--update", choices=("hinge", "exp"), default="hinge")
    p.add_argument("--kernel-c", type=float, default=None,
                   help="kernel constant c (default 0 for linear, 1 for poly)")
    p.add_argument("--sigma", type=float, default=1.0, help="gaussian kernel width")
    p.add_argument("--degree", type=int, default=2, help="polynomial kernel degree")
    p.add_argument("--iters", type=int, default=50, help="self-training iterations T")
    p.add_argument("--alpha-tol", type=float, default=1e-6, help="stop when L1 change of alpha is below this")
    p.add_argument("--no-early-stop", action="store_true", help="run all T iterations unless the error hits 0")
    p.add_argument("--restarts", type=int, default=8, help="solver starting points")
    p.add_argument("--solver-iters", type=int, default=5000, help="max projected-gradient iterations per start")
    p.add_argument("--ridge", type=float, default=0.0, help="add ridge * I to the quadratic term")


def _settings(args, **extra):
    if args.lam < 0:
        raise UsageError(f"--lambda must be >= 0, got {args.lam}")
    if args.sigma <= 0:
        raise UsageError("--sigma must be > 0")
    if args.degree < 1:
        raise UsageError("--degree must be >= 1")
    if args.iters < 1:
        raise UsageError("--iters must be >= 1")
    if args.kernel_c is not None and args.kernel_c < 0:
        raise UsageError("--kernel-c must be >= 0")
    try:
        solver = SolverOptions(max_iters=args.solver_iters, restarts=args.restarts,
                               seed=args.seed, ridge=args.ridge)
    except ValueError as e:
        raise UsageError(str(e)) from None
    return BenchSettings(lam=args.lam, diversity="disagreement" if args.diversity == "dis" else "double_fault",
                         update=args.update, kernel_c=args.kernel_c, sigma=args.sigma,
                         degree=args.degree, max_iters=args.iters, alpha_tolerance=args.alpha_tol,
                         early_stop=not args.no_early_stop, df_negate=args.df_negate,
                         solver=solver, seed=args.seed, **extra)


def cmd_pool_train(args):
    ds = _load_data(args)
    if args.trees < 1:
        raise UsageError("--trees must be >= 1")
    pool = train_pool(ds, args.trees, args.method, args.mtry, seed=args.seed,
                      max_depth=args.max_depth, min_leaf=args.min_leaf)
    save_pool(pool, args.out)
    print(f"trained {len(pool)} trees (method={pool.method}, seed={pool.seed}, mtry={pool.mtry}) -> {args.out}")


def cmd_pool_predict(args):
    ds = _load_data(args)
    pool = load_pool(args.pool)
    save_matrix_csv(args.out, pool_predict(pool, ds))
    if args.labels_out:
        save_matrix_csv(args.labels_out, ds.labels[:, None])
    print(f"wrote {ds.n_samples} x {len(pool)} predictions -> {args.out}")


def cmd_combine(args):
    settings = _settings(args)
    if args.preds:
        if not args.labels:
            raise UsageError("--preds needs --labels")
        preds = load_matrix_csv(args.preds)
        labels = load_matrix_csv(args.labels)
        if labels.shape[1] != 1:
            raise ValueError(f"{args.labels}: expected a single label column")
        labels = labels[:, 0]
        if labels.shape[0] != preds.shape[0]:
            raise ValueError("predictions and labels have different row counts")
        n_classes = int(max(preds.max(), labels.max())) + 1
        source = {"preds": args.preds, "labels": args.labels}
    else:
        if not (args.pool and args.data):
            raise UsageError("combine needs --pool and --data (or --preds and --labels)")
        pool = load_pool(args.pool)
        ds = _load_data(args)
        # validation set: bootstrap of the data the pool was trained on
        idx = bootstrap_indices(ds.n_samples, args.seed)
        preds = pool_predict(pool, ds.features[idx])
        labels = ds.labels[idx]
        n_classes = max(ds.class_count, pool.n_classes)
        source = {"pool": args.pool, "data": args.data, "bootstrap_seed": args.seed}

    kind = KERNEL_CHOICES[args.kernel]
    if args.method == "l2dwk":
        cfg = settings.l2dwk_config(kind)
        w, report = run_l2dwk(preds, labels, cfg, n_classes)
        save_weights(args.out, w, "l2dwk", alpha=report.final_alpha, config=cfg.as_dict(),
                     stop_reason=report.stop_reason,
                     extra={"iterations": report.iterations, "source": source})
        if args.report:
            atomic_write_text(args.report, report.to_csv())
        last = report.records[-1]
        print(f"l2dwk: {report.iterations} iteration(s), stop={report.stop_reason}, "
              f"validation error={last.epsilon:.4f}, effective L={(w > 1e-4).sum()} -> {args.out}")
    else:
        w, info = learn_weights(args.method, preds, labels, n_classes, settings)
        config = {"lambda": settings.lam, "diversity": settings.diversity,
                  "df_negate": settings.df_negate} if args.method == "qpd" else {}
        save_weights(args.out, w, args.method, config=config, extra={"source": source, **info})
        err = ensemble_error(preds, labels, w, n_classes)
        print(f"{args.method}: validation error={err:.4f}, effective L={(w > 1e-4).sum()} -> {args.out}")


def cmd_eval(args):
    pool = load_pool(args.pool)
    doc = load_weights(args.weights)
    w = doc["w"]
    if w.size != len(pool):
        raise ValueError(f"weights have {w.size} entries but the pool has {len(pool)} trees")
    ds = _load_data(args)
    preds = pool_predict(pool, ds)
    acc = 1.0 - ensemble_error(preds, ds.labels, w, max(ds.class_count, pool.n_classes))
    print(f"{acc:.4f}")


def cmd_bench(args):
    try:
        methods = parse_methods(args.methods)
    except ValueError as e:
        raise UsageError(str(e)) from None
    if args.folds < 2:
        raise UsageError("--folds must be >= 2")
    settings = _settings(args, folds=args.folds, n_trees=args.trees, pool_method=args.pool_method,
                         mtry=args.mtry, max_depth=args.max_depth, min_leaf=args.min_leaf)
    datasets = [(dataset_name(p), load_csv(p, label_column=args.label_column)) for p in args.data]
    result = run_bench(datasets, methods, settings, log=log.info)
    atomic_write_text(args.report, result.report_csv())
    stem = args.report[:-4] if args.report.endswith(".csv") else args.report
    atomic_write_text(args.summary or stem + ".summary.csv", result.summary_csv())
    if args.timings:
        atomic_write_text(args.timings, result.timings_csv())
    print(result.table())


def cmd_blobs(args):
    try:
        centers = [[float(v) for v in c.split(",")] for c in args.centers.split(";")]
    except ValueError:
        raise UsageError("--centers must look like '0,0;5,5;0,5'") from None
    ds = make_blobs(args.n_per_class, centers, args.spread, args.seed)
    save_csv(ds, args.out)
    print(f"wrote {ds.n_samples} rows, {ds.class_count} classes -> {args.out}")


def build_parser():
    parser = argparse.ArgumentParser(prog="l2dwk", description="Learn diverse classifier-ensemble weights.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    pool = sub.add_parser("pool", help="train or apply a tree pool")
    pool_sub = pool.add_subparsers(dest="pool_command", required=True)
    p = pool_sub.add_parser("train", help="train a bagging or random-subspace pool")
    _add_data_args(p)
    p.add_argument("--method", choices=POOL_METHODS, default="bagging")
    p.add_argument("--trees", type=int, default=301)
    p.add_argument("--seed", type=int, default=0)
    _add_tree_args(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_pool_train)

    p = pool_sub.add_parser("predict", help="dump pool predictions as CSV (rows samples, columns trees)")
    _add_data_args(p)
    p.add_argument("--pool", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--labels-out", help="also write the encoded labels as a one-column CSV")
    p.set_defaults(func=cmd_pool_predict)

    p = sub.add_parser("combine", help="learn classifier weights on a bootstrapped validation set")
    _add_data_args(p, required=False)
    p.add_argument("--pool")
    p.add_argument("--preds", help="prediction matrix CSV instead of --pool/--data")
    p.add_argument("--labels", help="label CSV to go with --preds")
    p.add_argument("--method", choices=COMBINE_METHODS, default="l2dwk")
    p.add_argument("--kernel", choices=tuple(KERNEL_CHOICES), default="linear")
    _add_learning_args(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="weights file (JSON)")
    p.add_argument("--report", help="per-iteration CSV for l2dwk")
    p.set_defaults(func=cmd_combine)

    p = sub.add_parser("eval", help="weighted-vote accuracy of a pool and weights on data")
    _add_data_args(p)
    p.add_argument("--pool", required=True)
    p.add_argument("--weights", required=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("bench", help="k-fold comparison of combination methods")
    p.add_argument("--data", required=True, action="append", help="CSV data file (repeatable)")
    p.add_argument("--label-column", type=_label_column, default=-1)
    p.add_argument("--folds", type=int, default=10)
    p.add_argument("--methods", default="uniform,best,majority,qpd,l2dwk-linear",
                   help=f"comma-separated, from: {', '.join(METHODS)}")
    p.add_argument("--trees", type=int, default=301)
    p.add_argument("--pool-method", choices=POOL_METHODS, default="bagging")
    _add_tree_args(p)
    _add_learning_args(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--report", required=True, help="per-fold CSV")
    p.add_argument("--summary", help="aggregate CSV (default: <report>.summary.csv)")
    p.add_argument("--timings", help="optional CSV of per-row wall-clock seconds")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("blobs", help="write a synthetic Gaussian-blob dataset")
    p.add_argument("--n-per-class", type=int, default=200)
    p.add_argument("--centers", default="0,0;3,0;0,3")
    p.add_argument("--spread", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_blobs)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        args.func(args)
    except UsageError as e:
        parser.print_usage(sys.stderr)
        print(f"l2dwk: error: {e}", file=sys.stderr)
        return 2
    except (BenchError, DatasetError, PoolFormatError, ValueError, OSError) as e:
        print(f"l2dwk: error: {e}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
