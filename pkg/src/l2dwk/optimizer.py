"""Minimise q.w + w'Hw over the probability simplex.

H is not assumed positive semidefinite: the diversity terms make it
indefinite in general. The solver runs projected gradient descent with an
Armijo backtracking line search from several starting points and keeps the
best stationary point. A lattice search is provided as a test oracle for
small L.
"""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass, field

import numpy as np

ARMIJO = 1e-4
BACKTRACK = 0.5
PSD_TOL = 1e-10


def project_simplex(v):
    """Euclidean projection onto {w : w >= 0, sum(w) = 1} by sort and threshold."""
    v = np.asarray(v, dtype=np.float64)
    if v.ndim != 1 or v.size == 0:
        raise ValueError("project_simplex needs a nonempty vector")
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    ind = np.arange(1, v.size + 1)
    rho = np.flatnonzero(u - css / ind > 0)[-1]
    tau = css[rho] / (rho + 1)
    w = np.maximum(v - tau, 0.0)
    return w / w.sum()


@dataclass(frozen=True)
class QuadraticObjective:
    q: np.ndarray
    H: np.ndarray

    def __post_init__(self):
        q = np.array(self.q, dtype=np.float64)
        H = np.array(self.H, dtype=np.float64)
        if q.ndim != 1 or H.shape != (q.size, q.size):
            raise ValueError(f"incompatible shapes q{q.shape} H{H.shape}")
        if not (np.isfinite(q).all() and np.isfinite(H).all()):
            raise ValueError("objective has non-finite entries")
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "H", 0.5 * (H + H.T))

    @property
    def size(self):
        return self.q.size

    def value(self, w):
        return float(self.q @ w + w @ self.H @ w)

    def values(self, W):
        """Objective at each row of W."""
        return W @ self.q + np.einsum("ij,jk,ik->i", W, self.H, W)

    def gradient(self, w):
        return self.q + 2.0 * (self.H @ w)

    def scaled(self, c):
        return QuadraticObjective(c * self.q, c * self.H)

    def with_ridge(self, r):
        return self if r == 0 else QuadraticObjective(self.q, self.H + r * np.eye(self.size))


@dataclass(frozen=True)
class SolverOptions:
    max_iters: int = 5000
    step_tolerance: float = 1e-12
    objective_tolerance: float = 1e-10
    restarts: int = 8
    seed: int = 0
    ridge: float = 0.0

    def __post_init__(self):
        if self.max_iters < 1 or self.restarts < 1:
            raise ValueError("max_iters and restarts must be positive")
        if not (self.step_tolerance > 0 and self.objective_tolerance > 0):
            raise ValueError("tolerances must be positive")
        if self.ridge < 0:
            raise ValueError("ridge must be >= 0")


@dataclass
class QPSolution:
    w: np.ndarray
    objective: float
    iterations: int = 0
    starts: int = 1
    psd: bool | None = None
    min_eigenvalue: float | None = None
    converged: bool = True
    trace: list = field(default_factory=list, repr=False)


def min_eigenvalue(H):
    return float(np.linalg.eigvalsh(H)[0]) if H.size else 0.0


def _starts(L, restarts, seed):
    pts = [np.full(L, 1.0 / L)]
    rng = np.random.default_rng(seed)
    n_vertex = min(restarts - 1, L)
    for j in np.sort(rng.choice(L, size=n_vertex, replace=False)):
        e = np.zeros(L)
        e[j] = 1.0
        pts.append(e)
    for _ in range(restarts - 1 - n_vertex):
        pts.append(rng.dirichlet(np.ones(L)))
    return pts


def _descend(obj, x, s0, opts, trace=None):
    f = obj.value(x)
    g = obj.gradient(x)
    s_max = s0 * 2.0 ** 40
    if trace is not None:
        trace.append(f)
    t = s0
    for it in range(1, opts.max_iters + 1):
        # Frank-Wolfe gap: zero exactly at KKT points of the simplex problem
        if g @ x - g.min() <= opts.objective_tolerance:
            return x, f, it - 1, True
        while True:
            x_new = project_simplex(x - t * g)
            d = x_new - x
            f_new = obj.value(x_new)
            if f_new <= f + ARMIJO * (g @ d) or np.abs(d).max() <= opts.step_tolerance:
                break
            t *= BACKTRACK
        if f_new > f:
            # step collapsed below tolerance without descent
            return x, f, it, True
        g_new = obj.gradient(x_new)
        x, f = x_new, f_new
        if trace is not None:
            trace.append(f)
        if np.abs(d).max() <= opts.step_tolerance:
            return x, f, it, True
        # Barzilai-Borwein trial step for the next iteration, doubling when curvature is not positive
        curv = d @ (g_new - g)
        t = min(max(d @ d / curv, s0), s_max) if curv > 0 else min(2.0 * t, s_max)
        g = g_new
    return x, f, opts.max_iters, False


def solve_simplex_qp(obj: QuadraticObjective, opts: SolverOptions | None = None,
                     trace=False) -> QPSolution:
    """Multi-start projected gradient descent over the simplex.

    Starts are the barycenter, up to ``restarts - 1`` seeded distinct
    vertices, and seeded Dirichlet points if restarts exceed L + 1. The
    lowest objective wins; near-ties go to the lexicographically smallest w.
    """
    opts = opts or SolverOptions()
    obj = obj.with_ridge(opts.ridge)
    L = obj.size
    lam_min = min_eigenvalue(obj.H)
    psd = lam_min >= -PSD_TOL * max(1.0, np.abs(obj.H).max())
    s0 = 1.0 / (np.linalg.norm(obj.H) + np.linalg.norm(obj.q) + 1.0)

    best = None
    total_iters = 0
    all_converged = True
    traces = []
    starts = _starts(L, opts.restarts, opts.seed)
    for x0 in starts:
        tr = [] if trace else None
        x, f, iters, ok = _descend(obj, x0, s0, opts, tr)
        total_iters += iters
        all_converged &= ok
        if trace:
            traces.append(tr)
        if best is None or _better(f, x, best[0], best[1]):
            best = (f, x)
    f, w = best
    return QPSolution(w=w, objective=f, iterations=total_iters, starts=len(starts), psd=bool(psd),
                      min_eigenvalue=lam_min, converged=all_converged, trace=traces)


def _better(f, x, f_best, x_best):
    tol = 1e-12 * max(1.0, abs(f_best))
    if f < f_best - tol:
        return True
    if f > f_best + tol:
        return False
    for a, b in zip(x, x_best):
        if a != b:
            return a < b
    return False


def simplex_lattice(L, grid_step):
    m = int(round(1.0 / grid_step))
    if m < 1 or abs(m * grid_step - 1.0) > 1e-9:
        raise ValueError(f"grid_step {grid_step} does not divide 1")
    return _lattice(L, m)


@functools.lru_cache(maxsize=16)
def _lattice(L, m):
    if L == 1:
        W = np.ones((1, 1))
        W.setflags(write=False)
        return W
    # stars and bars: L - 1 bar positions among m + L - 1 slots
    cuts = np.array(list(itertools.combinations(range(m + L - 1), L - 1)), dtype=np.int64)
    ends = np.full((cuts.shape[0], 1), m + L - 1)
    parts = np.diff(np.hstack([np.full_like(ends, -1), cuts, ends]), axis=1) - 1
    W = parts / m
    W.setflags(write=False)
    return W


def brute_force_simplex(obj: QuadraticObjective, grid_step=0.01) -> QPSolution:
    """Exhaustive search over the lattice {w : w_j = k * grid_step, sum = 1}, L <= 4."""
    if obj.size > 4:
        raise ValueError("brute_force_simplex supports L <= 4 only")
    W = simplex_lattice(obj.size, grid_step)
    vals = obj.values(W)
    i = int(np.argmin(vals))
    return QPSolution(w=W[i], objective=float(vals[i]), iterations=len(W), starts=0)
