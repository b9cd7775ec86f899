"""Classifier-ensemble weights from a self-trained, kernel-weighted accuracy and diversity objective."""

__version__ = "0.1.0"

from .dataset import Dataset, FoldPlan, bootstrap, load_csv, make_blobs, stratified_kfold
from .diversity import (disagreement_matrix, div_value, double_fault_matrix, kernel_disagreement,
                        kernel_double_fault)
from .kernels import KernelSpec, kernel_eval, weighted_gram, weighted_ones_row
from .optimizer import (QuadraticObjective, SolverOptions, brute_force_simplex, project_simplex,
                        solve_simplex_qp)
from .oracle import (accuracy_vector, ensemble_error, margins, oracle_matrix, weighted_vote,
                     weighted_votes)
from .pool import ClassifierPool, load_pool, pool_predict, save_pool, train_pool
from .selftrain import (L2DWKConfig, TrainReport, build_objective, exp_alpha_star, hinge_alpha_star,
                        qpd, run_l2dwk, update_alpha)
from .trees import DecisionTree, predict_tree, train_tree
