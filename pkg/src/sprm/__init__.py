"""Sparse polynomial minimax regression with anomalous data filtering."""
from .bench import SplitSpec, compute_metrics, ingest_csv, normalize, run_benchmark, split
from .fractional import FpModel, FpPoint, QcqpPoint, map_forward, map_inverse
from .lp import LpProblem, build_chebyshev_lp, solve_least_squares, solve_lp
from .oracle import MilpInstance, anomalous_subset_oracle, solve_milp_exact
from .poly import Dataset, SparseModel, design_matrix, enumerate_basis, eval_monomial, predict
from .relaxation import (build_sdc_certificate, check_exactness, soc_constraint_residuals,
                         solve_linear_relaxation)
from .tscrr import TscrrConfig, fit_tscrr, load_model, residual_profile, save_model

__version__ = "0.1.0"
