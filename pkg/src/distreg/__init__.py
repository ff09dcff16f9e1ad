"""Linear regression by maximizing a kernel density likelihood of residuals.

Main entry points:

- :func:`fit_dr`, :func:`fit_mr`, :func:`fit_qr` for slope/intercept estimation
- :func:`select_lambda` for adaptive-LASSO selection tuned by GIC
- :func:`run_replications` for Monte Carlo comparison of the estimators
"""

__version__ = "0.1.0"

from .data import Dataset, load_csv, save_csv, split_last, standardize
from .errors import (
    ArgumentError,
    DataError,
    DegenerateDataError,
    DistregError,
    FileIOError,
    NumericError,
    SelectionError,
    SingularDesignError,
)
from .kde import Bandwidth, bandwidth_plugin, bandwidth_silverman, kde_eval, kernel_deriv, kernel_eval
from .likelihood import DiffSet, LikelihoodConfig, build_diffset, loglik, loglik_grad
from .optim import OptimOptions, OptimResult, bb_maximize, scalar_minimize
from .regress import DrConfig, FitResult, estimate_intercept, fit_dr, fit_mr, fit_qr, predict
from .sim import ErrorDist, ScenarioSpec, gen_scenario, run_replications, sample_error
from .sparse import PenaltyConfig, fit_dr_alasso, gic, select_lambda

__all__ = [name for name in dir() if not name.startswith("_")]
