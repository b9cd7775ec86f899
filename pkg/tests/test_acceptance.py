"""Acceptance suite. Each test carries a ``criterion`` mark; conftest prints one PASS/FAIL line per criterion."""

import csv
import io
import time

import numpy as np
import pytest

from l2dwk.cli import main
from l2dwk.dataset import make_blobs, save_csv
from l2dwk.diversity import disagreement_matrix, double_fault_matrix, kernel_disagreement
from l2dwk.kernels import KernelSpec, weighted_gram
from l2dwk.optimizer import QuadraticObjective, brute_force_simplex, solve_simplex_qp
from l2dwk.oracle import accuracy_vector, margins, oracle_matrix
from l2dwk.selftrain import L2DWKConfig, exp_alpha_star, hinge_alpha_star, run_l2dwk, update_alpha

criterion = pytest.mark.criterion


def random_O(rng, n, L, p=0.6):
    return np.where(rng.random((n, L)) < p, 1.0, -1.0)


@criterion(1, "alpha stays on the simplex for 50 iterations of both update rules")
def test_simplex_conservation():
    rng = np.random.default_rng(101)
    start = time.perf_counter()
    for _ in range(20):
        n, L, C = int(rng.integers(20, 201)), int(rng.integers(2, 21)), int(rng.integers(2, 5))
        y = rng.integers(0, C, size=n)
        wrong = (y[:, None] + rng.integers(1, C, size=(n, L))) % C
        preds = np.where(rng.random((n, L)) < 0.6, y[:, None], wrong)
        preds[0] = (y[0] + 1) % C        # one sample every classifier gets wrong keeps the error above 0
        for update in ("hinge", "exp"):
            cfg = L2DWKConfig(lam=float(rng.uniform(0, 2)), kernel=KernelSpec.gaussian(1.0), update=update,
                              max_iters=50, early_stop=False, alpha_tolerance=0.0)
            _, rep = run_l2dwk(preds, y, cfg, C, keep_alpha_history=True)
            assert rep.iterations == 50 and rep.stop_reason == "max_iters"
            for a in rep.alpha_history:
                assert abs(a.sum() - 1) <= 1e-9
                assert a.min() >= -1e-12
    assert time.perf_counter() - start < 30


@criterion(2, "solver is never worse than the 0.01 lattice (+1e-3) on L = 3")
def test_solver_vs_lattice():
    rng = np.random.default_rng(102)
    start = time.perf_counter()
    for i in range(100):
        A = rng.normal(size=(3, 3))
        H = A @ A.T if i % 2 == 0 else 0.5 * (A + A.T)
        obj = QuadraticObjective(rng.normal(size=3), H)
        assert solve_simplex_qp(obj).objective <= brute_force_simplex(obj, 0.01).objective + 1e-3
    assert time.perf_counter() - start < 60


@criterion(3, "lambda = 0, linear c = 0, uniform alpha gives the best-accuracy vertex")
def test_analytic_vertex():
    rng = np.random.default_rng(103)
    done = 0
    while done < 20:
        n, L = int(rng.integers(10, 80)), int(rng.integers(2, 15))
        y = rng.integers(0, 2, size=n)
        preds = np.where(rng.random((n, L)) < rng.uniform(0.4, 0.9, size=L), y[:, None], 1 - y[:, None])
        P = accuracy_vector(oracle_matrix(preds, y))
        if np.sum(P == P.max()) != 1:
            continue
        # the first iteration solves with uniform alpha
        w, _ = run_l2dwk(preds, y, L2DWKConfig(lam=0.0, kernel=KernelSpec.linear(0.0), max_iters=1))
        np.testing.assert_allclose(w, np.eye(L)[np.argmax(P)], atol=1e-6)
        done += 1


@criterion(4, "diversity identities")
def test_diversity_identities():
    rng = np.random.default_rng(104)
    col = random_O(rng, 30, 1)[:, 0]
    D = disagreement_matrix(np.column_stack([col, col, -col]))
    assert D[0, 1] == 0 and D[0, 2] == 1
    right, wrong = np.ones(30), -np.ones(30)
    F = double_fault_matrix(np.column_stack([wrong, wrong, right]))
    assert F[0, 1] == 1 and F[0, 2] == 0
    for _ in range(20):
        n, L = int(rng.integers(1, 100)), int(rng.integers(1, 15))
        O = random_O(rng, n, L)
        K = kernel_disagreement(KernelSpec.linear(0.0), np.full(n, 1.0 / n), O)
        assert np.abs(K - disagreement_matrix(O)).max() <= 1e-12


@criterion(5, "update-rule fixed points")
def test_update_rule_fixed_points():
    rng = np.random.default_rng(105)
    for t in range(1, 21):
        n = int(rng.integers(2, 100))
        a = rng.dirichlet(np.ones(n))
        m = rng.uniform(-1, 1, size=n)
        nxt = update_alpha(a, exp_alpha_star(a, m, 0.5), t)
        assert np.abs(nxt - a).sum() <= 1e-12
    for _ in range(20):
        n, L = int(rng.integers(5, 100)), int(rng.integers(1, 12))
        O = random_O(rng, n, L)
        O[0] = -1.0
        w = rng.dirichlet(np.ones(L))
        m = margins(O, w)
        star = hinge_alpha_star(m, float(np.mean(m <= 0)), n)
        assert abs(star.sum() - 1) <= 1e-12
        np.testing.assert_array_equal(star > 0, m <= 0)


@criterion(6, "a perfect classifier with lambda = 0 stops with zero_error at t = 1")
def test_early_stop_contract():
    rng = np.random.default_rng(106)
    y = rng.integers(0, 3, size=120)
    noisy = np.where(rng.random((120, 6)) < 0.6, y[:, None], (y[:, None] + 1) % 3)
    preds = np.column_stack([noisy[:, :3], y, noisy[:, 3:]])
    _, rep = run_l2dwk(preds, y, L2DWKConfig(lam=0.0), 3)
    assert rep.stop_reason == "zero_error"
    assert rep.iterations == 1 and rep.records[0].t == 1


@criterion(7, "weighted gram is symmetric, PSD and linear in alpha")
def test_gram_properties():
    rng = np.random.default_rng(107)
    for _ in range(50):
        n, L = int(rng.integers(1, 60)), int(rng.integers(1, 15))
        O = random_O(rng, n, L, p=rng.uniform(0.2, 0.9))
        a1, a2 = rng.dirichlet(np.ones(n)), rng.dirichlet(np.ones(n))
        b = rng.uniform()
        c = float(rng.uniform(0, 3))
        for spec in (KernelSpec.linear(c), KernelSpec.gaussian(float(rng.uniform(0.1, 3))),
                     KernelSpec.polynomial(c, int(rng.integers(1, 5)))):
            K = weighted_gram(spec, a1, O)
            assert np.abs(K - K.T).max() <= 1e-12
            assert np.linalg.eigvalsh(K).min() >= -1e-8
            mix = weighted_gram(spec, b * a1 + (1 - b) * a2, O)
            lin = b * K + (1 - b) * weighted_gram(spec, a2, O)
            assert np.abs(mix - lin).max() <= 1e-10


# frozen from the seeded run below: correct test predictions per fold, 60 test samples per fold
FROZEN_CORRECT = {
    "uniform": [53, 53, 52, 52, 48, 47, 52, 49, 53, 47],
    "l2dwk-linear": [49, 50, 55, 51, 48, 48, 53, 50, 53, 48],
}


def bench_argv(data, report):
    return ["bench", "--data", str(data), "--folds", "10", "--trees", "51", "--max-depth", "3",
            "--methods", "uniform,l2dwk-linear", "--seed", "1", "--report", str(report)]


@pytest.fixture(scope="module")
def blob_bench(tmp_path_factory):
    root = tmp_path_factory.mktemp("bench")
    data = root / "blobs.csv"
    ds = make_blobs(200, [[0, 0], [2.5, 0], [0, 2.5]], 1.0, seed=3)
    assert ds.n_samples == 600 and ds.class_count == 3
    save_csv(ds, data)
    report = root / "first.csv"
    start = time.perf_counter()
    code = main(bench_argv(data, report))
    return {"root": root, "data": data, "report": report, "code": code,
            "seconds": time.perf_counter() - start}


def fold_accuracies(text, method):
    return [float(r["test_accuracy"]) for r in csv.DictReader(io.StringIO(text)) if r["method"] == method]


@pytest.mark.slow
@criterion(8, "blob benchmark: l2dwk-linear within 0.02 of uniform vote, frozen accuracies")
def test_blob_benchmark(blob_bench):
    assert blob_bench["code"] == 0
    assert blob_bench["seconds"] < 300
    text = blob_bench["report"].read_text()
    uni = fold_accuracies(text, "uniform")
    l2 = fold_accuracies(text, "l2dwk-linear")
    assert len(uni) == len(l2) == 10
    assert np.mean(l2) >= np.mean(uni) - 0.02
    for method, acc in (("uniform", uni), ("l2dwk-linear", l2)):
        np.testing.assert_allclose(acc, np.array(FROZEN_CORRECT[method]) / 60, atol=1e-6)
    assert np.mean(uni) == pytest.approx(506 / 600, abs=1e-6)
    assert np.mean(l2) == pytest.approx(505 / 600, abs=1e-6)


@pytest.mark.slow
@criterion(9, "two identical bench runs give byte-identical reports")
def test_bench_determinism(blob_bench):
    second = blob_bench["root"] / "second.csv"
    assert main(bench_argv(blob_bench["data"], second)) == 0
    assert blob_bench["report"].read_bytes() == second.read_bytes()
