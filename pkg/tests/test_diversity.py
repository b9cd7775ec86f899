import math

import numpy as np
import pytest

from l2dwk.diversity import (disagreement_matrix, div_value, diversity_kind, double_fault_matrix,
                             kernel_disagreement, kernel_double_fault)
from l2dwk.kernels import KernelSpec


def counted(O, pair_rule):
    """Pairwise fractions by direct counting over samples."""
    n, L = O.shape
    return np.array([[np.mean([pair_rule(O[k, i], O[k, j]) for k in range(n)]) for j in range(L)]
                     for i in range(L)])


def rand_O(rng, n, L):
    return np.where(rng.random((n, L)) < 0.55, 1.0, -1.0)


def test_disagreement_examples():
    col = np.array([1.0, -1.0, 1.0, 1.0])
    O = np.column_stack([col, col, -col, [1, 1, -1, -1]])
    D = disagreement_matrix(O)
    assert D[0, 1] == 0 and D[0, 2] == 1
    assert D[0, 3] == 0.75
    np.testing.assert_array_equal(np.diag(D), 0)


def test_double_fault_examples():
    right, wrong = np.ones(5), -np.ones(5)
    D = double_fault_matrix(np.column_stack([right, right, wrong, wrong]))
    assert D[0, 1] == 0 and D[2, 3] == 1 and D[0, 2] == 0


def test_plain_matrices_match_counting():
    rng = np.random.default_rng(0)
    O = rand_O(rng, 23, 6)
    np.testing.assert_allclose(disagreement_matrix(O), counted(O, lambda a, b: a != b), atol=1e-14)
    np.testing.assert_allclose(double_fault_matrix(O), counted(O, lambda a, b: a < 0 and b < 0), atol=1e-14)


def test_kernel_disagreement_linear_uniform_equals_plain():
    rng = np.random.default_rng(1)
    for _ in range(20):
        n, L = int(rng.integers(1, 50)), int(rng.integers(1, 10))
        O = rand_O(rng, n, L)
        K = kernel_disagreement(KernelSpec.linear(0.0), np.full(n, 1 / n), O)
        assert np.abs(K - disagreement_matrix(O)).max() <= 1e-12


def test_kernel_disagreement_gaussian():
    col = np.array([1.0, -1.0, -1.0])
    O = np.column_stack([col, col, -col])
    D = kernel_disagreement(KernelSpec.gaussian(1.0), np.array([0.5, 0.25, 0.25]), O)
    assert D[0, 1] == pytest.approx(0.0, abs=1e-15)
    assert D[0, 2] == pytest.approx(0.5 * (1 - math.exp(-2)))
    np.testing.assert_allclose(np.diag(D), 0, atol=1e-15)


def test_kernel_double_fault_linear_uniform_is_plain_over_n():
    rng = np.random.default_rng(2)
    for n, L in [(1, 2), (3, 2), (7, 4), (25, 6)]:
        O = rand_O(rng, n, L)
        K = kernel_double_fault(KernelSpec.linear(0.0), np.full(n, 1 / n), O)
        np.testing.assert_allclose(K, double_fault_matrix(O) / n, atol=1e-14)


def test_kernel_double_fault_gaussian_hand_values():
    spec = KernelSpec.gaussian(1.0)
    both_right = kernel_double_fault(spec, np.full(4, 0.25), np.ones((4, 2)))
    np.testing.assert_allclose(both_right, 0, atol=1e-15)
    # N = 1, both wrong: gram entries k(-1,-1) = 1, ones-row entries k(1,-1) = e^-2
    D = kernel_double_fault(spec, np.array([1.0]), np.array([[-1.0, -1.0]]))
    expected = (1 - 2 * math.exp(-2) + 1) / 4
    np.testing.assert_allclose(D, expected, atol=1e-15)


@pytest.mark.parametrize("build", ["dis", "df", "kdis", "kdf"])
def test_permutation_invariance(build):
    rng = np.random.default_rng(3)
    O = rand_O(rng, 30, 7)
    a = rng.dirichlet(np.ones(30))
    spec = KernelSpec.gaussian(0.7)
    f = {"dis": lambda M: disagreement_matrix(M), "df": lambda M: double_fault_matrix(M),
         "kdis": lambda M: kernel_disagreement(spec, a, M), "kdf": lambda M: kernel_double_fault(spec, a, M)}[build]
    p = rng.permutation(7)
    np.testing.assert_allclose(f(O[:, p]), f(O)[np.ix_(p, p)], atol=1e-14)


def test_symmetry_and_range():
    rng = np.random.default_rng(4)
    O = rand_O(rng, 40, 9)
    for D in (disagreement_matrix(O), double_fault_matrix(O)):
        assert np.abs(D - D.T).max() <= 1e-12
        assert D.min() >= 0 and D.max() <= 1


def test_div_value():
    assert div_value([0.5, 0.5], np.zeros((2, 2))) == 0
    D = np.array([[0.1, 0.4], [0.4, 0.3]])
    assert div_value([0, 1], D) == 0.3
    assert div_value([0.5, 0.5], np.array([[0, 1], [1, 0]])) == 0.5
    with pytest.raises(ValueError):
        div_value([1.0], D)


def test_div_value_nonnegative_on_plain_matrices():
    rng = np.random.default_rng(5)
    for _ in range(30):
        O = rand_O(rng, 20, 5)
        w = rng.dirichlet(np.ones(5))
        assert div_value(w, disagreement_matrix(O)) >= 0
        assert div_value(w, double_fault_matrix(O)) >= 0


def test_kind_names():
    assert diversity_kind("dis") == "disagreement"
    assert diversity_kind("df") == "double_fault"
    with pytest.raises(ValueError):
        diversity_kind("kappa")
