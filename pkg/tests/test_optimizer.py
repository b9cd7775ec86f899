import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from l2dwk.optimizer import (QuadraticObjective, SolverOptions, brute_force_simplex, project_simplex,
                             simplex_lattice, solve_simplex_qp)


def random_objective(rng, L, psd):
    A = rng.normal(size=(L, L))
    H = A @ A.T if psd else 0.5 * (A + A.T)
    return QuadraticObjective(rng.normal(size=L), H)


def test_projection_examples():
    np.testing.assert_allclose(project_simplex([0.6, 0.6]), [0.5, 0.5])
    np.testing.assert_allclose(project_simplex([1.5, -0.5]), [1.0, 0.0])
    v = np.array([0.2, 0.3, 0.5])
    np.testing.assert_allclose(project_simplex(v), v, atol=1e-15)


@settings(max_examples=200, deadline=None)
@given(arrays(np.float64, st.integers(1, 12), elements=st.floats(-50, 50)))
def test_projection_is_closest_feasible_point(v):
    p = project_simplex(v)
    assert p.min() >= 0 and abs(p.sum() - 1) <= 1e-12
    # variational inequality: (v - p).(z - p) <= 0 for every vertex z of the simplex
    r = v - p
    assert (r - r @ p <= 1e-9 * (1 + np.abs(v).max())).all()


def test_lp_vertex():
    sol = solve_simplex_qp(QuadraticObjective([-1.0, 1.0], np.zeros((2, 2))))
    np.testing.assert_array_equal(sol.w, [1.0, 0.0])


def test_identity_gives_uniform():
    sol = solve_simplex_qp(QuadraticObjective(np.zeros(5), np.eye(5)))
    np.testing.assert_allclose(sol.w, 0.2, atol=1e-9)
    assert sol.psd


def test_non_finite_rejected():
    with pytest.raises(ValueError):
        QuadraticObjective([np.nan, 0.0], np.eye(2))
    with pytest.raises(ValueError):
        QuadraticObjective([0.0, 0.0], [[np.inf, 0], [0, 1]])


def test_objective_symmetrised():
    obj = QuadraticObjective([0, 0], [[1.0, 2.0], [0.0, 1.0]])
    np.testing.assert_array_equal(obj.H, [[1, 1], [1, 1]])


def test_lattice_enumeration():
    W = simplex_lattice(2, 0.5)
    assert sorted(map(tuple, W)) == [(0, 1), (0.5, 0.5), (1, 0)]
    assert simplex_lattice(3, 0.01).shape == (5151, 3)
    with pytest.raises(ValueError):
        simplex_lattice(3, 0.3)


def test_brute_force_examples():
    sol = brute_force_simplex(QuadraticObjective([-1.0, 1.0], np.zeros((2, 2))), 0.5)
    np.testing.assert_array_equal(sol.w, [1.0, 0.0])
    with pytest.raises(ValueError):
        brute_force_simplex(QuadraticObjective(np.zeros(5), np.eye(5)))


def test_lattice_never_beats_solver_on_convex():
    rng = np.random.default_rng(0)
    for _ in range(100):
        L = int(rng.integers(2, 4))
        obj = random_objective(rng, L, psd=True)
        assert solve_simplex_qp(obj).objective <= brute_force_simplex(obj, 0.01).objective + 1e-6


def test_agrees_with_lattice_within_grid_resolution():
    rng = np.random.default_rng(1)
    for _ in range(30):
        obj = random_objective(rng, 3, psd=True)
        assert abs(solve_simplex_qp(obj).objective - brute_force_simplex(obj, 0.01).objective) <= 1e-3


def test_monotone_descent_trace():
    rng = np.random.default_rng(2)
    for psd in (True, False):
        for _ in range(10):
            sol = solve_simplex_qp(random_objective(rng, 8, psd), trace=True)
            for tr in sol.trace:
                assert all(b <= a + 1e-12 for a, b in zip(tr, tr[1:]))


def test_solution_on_simplex():
    rng = np.random.default_rng(3)
    for _ in range(20):
        w = solve_simplex_qp(random_objective(rng, 30, psd=False)).w
        assert w.min() >= 0 and abs(w.sum() - 1) <= 1e-12


def test_scaling_keeps_argmin():
    rng = np.random.default_rng(4)
    for _ in range(20):
        obj = random_objective(rng, 6, psd=True)
        a = solve_simplex_qp(obj).w
        b = solve_simplex_qp(obj.scaled(37.0)).w
        np.testing.assert_allclose(a, b, atol=1e-5)


def test_psd_flag_and_ridge():
    H = np.array([[1.0, 0.0], [0.0, -1.0]])
    sol = solve_simplex_qp(QuadraticObjective([0.0, 0.0], H))
    assert not sol.psd and sol.min_eigenvalue == pytest.approx(-1.0)
    ridged = solve_simplex_qp(QuadraticObjective([0.0, 0.0], H), SolverOptions(ridge=2.0))
    assert ridged.psd


def test_deterministic():
    rng = np.random.default_rng(5)
    obj = random_objective(rng, 12, psd=False)
    a = solve_simplex_qp(obj, SolverOptions(seed=3))
    b = solve_simplex_qp(obj, SolverOptions(seed=3))
    assert a.w.tobytes() == b.w.tobytes()


def test_single_classifier():
    sol = solve_simplex_qp(QuadraticObjective([0.3], [[2.0]]))
    np.testing.assert_array_equal(sol.w, [1.0])


def test_options_validated():
    with pytest.raises(ValueError):
        SolverOptions(restarts=0)
    with pytest.raises(ValueError):
        SolverOptions(ridge=-1)
