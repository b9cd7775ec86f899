"""Learning classifier weights with adaptively weighted kernels.

The loop alternates two steps. Given sample weights ``alpha`` (the kernel
weights), the classifier weights ``w`` solve a simplex QP that rewards
kernel-weighted accuracy and kernel-weighted pairwise diversity. Given ``w``,
``alpha`` is moved toward the samples the ensemble gets wrong, damped by
``1/t``. ``qpd`` is the same QP without kernels or sample weights.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from ._io import atomic_write_text
from .diversity import (disagreement_matrix, diversity_kind, double_fault_matrix,
                        kernel_disagreement, kernel_double_fault)
from .kernels import KernelSpec, weighted_ones_row
from .optimizer import QuadraticObjective, SolverOptions, solve_simplex_qp
from .oracle import accuracy_vector, check_simplex, ensemble_errors, oracle_matrix

UPDATE_RULES = ("hinge", "exp")
EPS_CLAMP = 1e-6
# margins within this of zero count as zero (ties like w = [0.5, 0.5] carry rounding noise)
MARGIN_TOL = 1e-12


@dataclass(frozen=True)
class L2DWKConfig:
    lam: float = 0.5
    kernel: KernelSpec = field(default_factory=KernelSpec)
    diversity: str = "disagreement"
    update: str = "hinge"
    max_iters: int = 50
    alpha_tolerance: float = 1e-6
    early_stop: bool = True
    df_negate: bool = False
    solver: SolverOptions = field(default_factory=SolverOptions)

    def __post_init__(self):
        if not (self.lam >= 0 and math.isfinite(self.lam)):
            raise ValueError(f"lambda must be a finite value >= 0, got {self.lam}")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.update not in UPDATE_RULES:
            raise ValueError(f"unknown update rule {self.update!r}; expected one of {UPDATE_RULES}")
        if self.alpha_tolerance < 0:
            raise ValueError("alpha_tolerance must be >= 0")
        object.__setattr__(self, "diversity", diversity_kind(self.diversity))

    def as_dict(self):
        s = self.solver
        return {
            "lambda": self.lam,
            "kernel": self.kernel.as_dict(),
            "diversity": self.diversity,
            "update": self.update,
            "max_iters": self.max_iters,
            "alpha_tolerance": self.alpha_tolerance,
            "early_stop": self.early_stop,
            "df_negate": self.df_negate,
            "solver": {"max_iters": s.max_iters, "step_tolerance": s.step_tolerance,
                       "objective_tolerance": s.objective_tolerance, "restarts": s.restarts,
                       "seed": s.seed, "ridge": s.ridge},
        }


@dataclass
class IterationRecord:
    t: int
    epsilon: float            # weighted-vote error rate
    epsilon_margin: float     # fraction of samples with margin <= 0
    alpha_change: float       # L1 distance between alpha^t and alpha^(t+1)
    objective: float
    psd: bool
    alpha_sum: float          # of alpha^t, the weights used in this iteration's solve
    alpha_min: float
    solver_iterations: int


@dataclass
class TrainReport:
    records: list
    final_w: np.ndarray
    final_alpha: np.ndarray
    stop_reason: str
    alpha_history: list = field(default_factory=list, repr=False)

    @property
    def iterations(self):
        return len(self.records)

    def to_csv(self):
        buf = io.StringIO()
        cols = list(IterationRecord.__dataclass_fields__)
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(cols)
        for r in self.records:
            w.writerow([_cell(getattr(r, c)) for c in cols])
        return buf.getvalue()


def _cell(v):
    if isinstance(v, (bool, np.bool_)):
        return int(v)
    if isinstance(v, float):
        return repr(v)
    return v


def _diversity(cfg, alpha, O):
    if cfg.diversity == "disagreement":
        return kernel_disagreement(cfg.kernel, alpha, O)
    D = kernel_double_fault(cfg.kernel, alpha, O)
    return -D if cfg.df_negate else D


def build_objective(O, alpha, cfg: L2DWKConfig) -> QuadraticObjective:
    """q = -K_alpha(1'O), H = -lambda * D_K_alpha, for minimisation over the simplex."""
    O = np.asarray(O, dtype=np.float64)
    q = -weighted_ones_row(cfg.kernel, alpha, O)
    if cfg.lam == 0:
        return QuadraticObjective(q, np.zeros((O.shape[1], O.shape[1])))
    return QuadraticObjective(q, -cfg.lam * _diversity(cfg, alpha, O))


def qpd_objective(O, lam, diversity="disagreement", df_negate=False) -> QuadraticObjective:
    O = np.asarray(O, dtype=np.float64)
    kind = diversity_kind(diversity)
    if kind == "disagreement":
        D = disagreement_matrix(O)
    else:
        D = -double_fault_matrix(O) if df_negate else double_fault_matrix(O)
    return QuadraticObjective(-accuracy_vector(O), -lam * D)


def qpd(O, lam, diversity="disagreement", opts: SolverOptions | None = None, df_negate=False):
    """Classifier weights maximising signed accuracy plus lam * plain pairwise diversity."""
    O = np.asarray(O, dtype=np.float64)
    if O.ndim != 2 or min(O.shape) < 1:
        raise ValueError("qpd needs an (N, L) oracle matrix with N, L >= 1")
    if lam < 0:
        raise ValueError("lambda must be >= 0")
    return solve_simplex_qp(qpd_objective(O, lam, diversity, df_negate), opts).w


def margin_nonpositive(m):
    return np.asarray(m) <= MARGIN_TOL


def hinge_alpha_star(m, epsilon, N=None):
    """Uniform weight 1/(N epsilon) on every sample with margin <= 0, zero elsewhere.

    ``epsilon`` must be the fraction of samples with margin <= 0, so that the
    result sums to one.
    """
    bad = margin_nonpositive(m)
    N = bad.size if N is None else N
    if not 0 < epsilon <= 1:
        raise ValueError(f"hinge update needs 0 < epsilon <= 1, got {epsilon}")
    if abs(bad.sum() - N * epsilon) > 0.5:
        raise ValueError(f"{bad.sum()} samples have margin <= 0 but N * epsilon = {N * epsilon:g}")
    return bad / (N * epsilon)


def exp_alpha_star(prev_alpha_star, m, epsilon):
    """Boosting-style reweighting prev * exp(-theta m) / Z with theta = ln((1-eps)/eps) / 2."""
    if not 0 < epsilon < 1:
        raise ValueError(f"exp update needs 0 < epsilon < 1, got {epsilon}")
    prev = check_simplex(prev_alpha_star, "prev_alpha_star")
    theta = 0.5 * math.log((1.0 - epsilon) / epsilon)
    with np.errstate(divide="ignore"):
        logw = np.log(prev) - theta * np.asarray(m, dtype=np.float64)
    w = np.exp(logw - logw.max())
    return w / w.sum()


def damping(t):
    if t < 1:
        raise ValueError("iteration index t starts at 1")
    return 1.0 / t


def update_alpha(alpha_t, alpha_star, t):
    """alpha^(t+1) = beta_t alpha* + (1 - beta_t) alpha^t with beta_t = 1/t."""
    beta = damping(t)
    return beta * np.asarray(alpha_star, dtype=np.float64) + (1.0 - beta) * np.asarray(alpha_t, dtype=np.float64)


def run_l2dwk(preds, labels, cfg: L2DWKConfig | None = None, n_classes=None,
              keep_alpha_history=False):
    """Self-training loop; returns ``(w, TrainReport)``.

    Stops early when the weighted-vote error reaches zero (the reweighting
    rules are undefined there) or, if ``cfg.early_stop``, when alpha moves
    less than ``cfg.alpha_tolerance`` in L1.
    """
    cfg = cfg or L2DWKConfig()
    preds = np.asarray(preds, dtype=np.int64)
    labels = np.asarray(labels, dtype=np.int64)
    if preds.ndim != 2 or min(preds.shape) < 1:
        raise ValueError("run_l2dwk needs an (N, L) prediction matrix with N, L >= 1")
    O = oracle_matrix(preds, labels)
    N = O.shape[0]
    if n_classes is None:
        n_classes = int(max(preds.max(), labels.max())) + 1

    alpha = np.full(N, 1.0 / N)
    exp_base = np.full(N, 1.0 / N)
    records, history = [], []
    stop_reason = "max_iters"
    w = None
    for t in range(1, cfg.max_iters + 1):
        if keep_alpha_history:
            history.append(alpha.copy())
        sol = solve_simplex_qp(build_objective(O, alpha, cfg), cfg.solver)
        w = sol.w
        eps = float(ensemble_errors(preds, labels, w, n_classes).mean())
        m = O @ w
        eps_margin = float(margin_nonpositive(m).mean())
        rec = IterationRecord(t, eps, eps_margin, 0.0, sol.objective, sol.psd,
                              float(alpha.sum()), float(alpha.min()), sol.iterations)
        records.append(rec)
        if eps == 0.0:
            stop_reason = "zero_error"
            break
        if cfg.update == "hinge":
            star = hinge_alpha_star(m, eps_margin, N)
        else:
            star = exp_alpha_star(exp_base, m, min(max(eps, EPS_CLAMP), 1.0 - EPS_CLAMP))
            exp_base = star
        new_alpha = update_alpha(alpha, star, t)
        rec.alpha_change = float(np.abs(new_alpha - alpha).sum())
        alpha = new_alpha
        if cfg.early_stop and rec.alpha_change < cfg.alpha_tolerance:
            stop_reason = "alpha_converged"
            break
    if keep_alpha_history:
        history.append(alpha.copy())
    return w, TrainReport(records, w, alpha, stop_reason, history)


WEIGHTS_FORMAT = "l2dwk-weights"
WEIGHTS_VERSION = 1


def save_weights(path, w, method, alpha=None, config=None, stop_reason=None, extra=None):
    """Write classifier weights (and optional loop state) as a JSON document."""
    doc = {
        "format": WEIGHTS_FORMAT,
        "version": WEIGHTS_VERSION,
        "method": method,
        "n_classifiers": int(len(w)),
        "w": [float(v) for v in w],
        "alpha": None if alpha is None else [float(v) for v in alpha],
        "stop_reason": stop_reason,
        "config": config,
    }
    if extra:
        doc.update(extra)
    atomic_write_text(path, json.dumps(doc, indent=2) + "\n")


def load_weights(path):
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as e:
            raise ValueError(f"{path}: not a weights file ({e})") from None
    if not isinstance(doc, dict) or doc.get("format") != WEIGHTS_FORMAT:
        raise ValueError(f"{path}: not a weights file")
    if doc.get("version") != WEIGHTS_VERSION:
        raise ValueError(f"{path}: unsupported weights version {doc.get('version')!r}")
    doc["w"] = check_simplex(np.array(doc["w"], dtype=np.float64))
    if doc.get("alpha") is not None:
        doc["alpha"] = np.array(doc["alpha"], dtype=np.float64)
    return doc
