"""Distribution regression and the two classical baselines.

``fit_dr`` maximizes the kernel log-likelihood of pairwise residual
differences; ``fit_mr`` is ordinary least squares and ``fit_qr`` is
check-loss (quantile) regression.  All three return a :class:`FitResult`
with slopes, intercept and residuals.
"""

from __future__ import annotations

import itertools
from dataclasses import asdict, dataclass, field
from typing import Any

import numpy as np
from scipy import optimize

from . import kde
from .data import Dataset
from .errors import ArgumentError, DegenerateDataError, NumericError, SingularDesignError
from .likelihood import LikelihoodConfig, build_diffset, loglik_and_grad
from .optim import OptimOptions, OptimResult, bb_maximize

INIT_RULES = ("median_regression", "ols", "zeros")
_EXACT_FIT_RTOL = 1e-10
INTERCEPT_RULES = {"mean": "mean", "mean_residual": "mean",
                   "median": "median", "median_residual": "median"}


@dataclass
class FitResult:
    method: str
    beta: np.ndarray
    intercept: float
    residuals: np.ndarray
    loglik: float | None = None
    optim: OptimResult | None = None
    h_used: kde.Bandwidth | None = None
    info: dict[str, Any] = field(default_factory=dict)

    @property
    def coefficients(self) -> np.ndarray:
        """Intercept followed by slopes."""
        return np.concatenate([[self.intercept], self.beta])


@dataclass(frozen=True)
class DrConfig:
    """Settings for :func:`fit_dr`.

    ``bandwidth`` is ``"plugin"``, ``"silverman"`` or a positive number
    (fixed bandwidth).  ``init`` is one of ``INIT_RULES`` or an explicit
    starting vector.  ``iterate_bandwidth`` > 0 re-selects the bandwidth
    from the fitted residuals and refits that many times.
    """

    kernel: str = kde.GAUSSIAN
    bandwidth: Any = "plugin"
    eps: float = kde.DEFAULT_FLOOR
    init: Any = "median_regression"
    optim: OptimOptions = OptimOptions()
    intercept: str = "mean"
    iterate_bandwidth: int = 0

    def __post_init__(self):
        kde.check_kernel(self.kernel)
        kde.check_floor(self.eps)
        if isinstance(self.bandwidth, str):
            if self.bandwidth not in ("plugin", "silverman"):
                raise ArgumentError(f"unknown bandwidth rule {self.bandwidth!r}")
        elif not (np.isfinite(float(self.bandwidth)) and float(self.bandwidth) > 0):
            raise ArgumentError("fixed bandwidth must be positive")
        if isinstance(self.init, str) and self.init not in INIT_RULES:
            raise ArgumentError(f"unknown init rule {self.init!r}")
        if self.intercept not in INTERCEPT_RULES:
            raise ArgumentError(f"unknown intercept rule {self.intercept!r}")
        if self.iterate_bandwidth < 0:
            raise ArgumentError("iterate_bandwidth must be non-negative")

    def describe(self) -> dict:
        out = asdict(self)
        if not isinstance(self.init, str):
            out["init"] = [float(v) for v in np.ravel(self.init)]
        return out


def _design(X: np.ndarray) -> np.ndarray:
    A = np.column_stack([np.ones(X.shape[0]), X])
    if np.linalg.matrix_rank(A) < A.shape[1]:
        raise SingularDesignError(f"design [1 X] of shape {A.shape} is rank deficient")
    return A


def fit_mr(d: Dataset) -> FitResult:
    """Ordinary least squares with intercept."""
    A = _design(d.X)
    coef, *_ = np.linalg.lstsq(A, d.Y, rcond=None)
    beta, nu = coef[1:], float(coef[0])
    return FitResult("MR", beta, nu, d.Y - nu - d.X @ beta)


def check_loss(r, tau: float = 0.5) -> float:
    r = np.asarray(r, dtype=float)
    return float(np.sum(r * (tau - (r < 0))))


def fit_qr(d: Dataset, tau: float = 0.5) -> FitResult:
    """Quantile regression with intercept, solved exactly as a linear program.

    The HiGHS solution is polished onto the nearest exact-fit basic solution
    (the ``p+1`` observations with smallest absolute residual) whenever that
    does not increase the check loss.
    """
    if not 0 < tau < 1:
        raise ArgumentError(f"tau must lie in (0, 1), got {tau}")
    A = _design(d.X)
    n, k = A.shape
    c = np.concatenate([np.zeros(k), np.full(n, tau), np.full(n, 1.0 - tau)])
    A_eq = np.hstack([A, np.eye(n), -np.eye(n)])
    bounds = [(None, None)] * k + [(0, None)] * (2 * n)
    res = optimize.linprog(c, A_eq=A_eq, b_eq=d.Y, bounds=bounds, method="highs")
    if res.status != 0:
        raise NumericError(f"quantile regression LP failed: {res.message}")
    coef = res.x[:k]
    loss = check_loss(d.Y - A @ coef, tau)
    basis = np.argsort(np.abs(d.Y - A @ coef), kind="stable")[:k]
    try:
        vertex = np.linalg.solve(A[basis], d.Y[basis])
    except np.linalg.LinAlgError:
        vertex = None
    if vertex is not None and check_loss(d.Y - A @ vertex, tau) <= loss:
        coef = vertex
    beta, nu = coef[1:], float(coef[0])
    return FitResult("QR", beta, nu, d.Y - nu - d.X @ beta, info={"tau": tau})


def qr_vertex_oracle(d: Dataset, tau: float = 0.5) -> tuple[np.ndarray, float]:
    """Brute-force quantile regression over all exact-fit basic solutions.

    Only practical for tiny ``n``; used to validate :func:`fit_qr`.
    """
    A = np.column_stack([np.ones(d.n), d.X])
    k = A.shape[1]
    best, best_loss = None, np.inf
    for rows in itertools.combinations(range(d.n), k):
        sub = A[list(rows)]
        if abs(np.linalg.det(sub)) < 1e-12:
            continue
        coef = np.linalg.solve(sub, d.Y[list(rows)])
        loss = check_loss(d.Y - A @ coef, tau)
        if loss < best_loss:
            best, best_loss = coef, loss
    return best, best_loss


def estimate_intercept(y_resid, rule: str = "mean") -> float:
    """Intercept from slope-adjusted responses ``Y - X beta``."""
    y_resid = np.asarray(y_resid, dtype=float)
    if y_resid.size == 0:
        raise ArgumentError("empty residual vector")
    if INTERCEPT_RULES.get(rule) == "mean":
        return float(np.mean(y_resid))
    if INTERCEPT_RULES.get(rule) == "median":
        return float(np.median(y_resid))
    raise ArgumentError(f"unknown intercept rule {rule!r}")


def select_bandwidth(resid, rule, kernel: str = kde.GAUSSIAN) -> kde.Bandwidth:
    if not isinstance(rule, str):
        return kde.Bandwidth(float(rule), "fixed")
    if rule == "plugin":
        bw = kde.bandwidth_plugin(resid)
    elif rule == "silverman":
        bw = kde.bandwidth_silverman(resid)
    else:
        raise ArgumentError(f"unknown bandwidth rule {rule!r}")
    if kernel != kde.GAUSSIAN:
        bw = kde.Bandwidth(bw.h * kde.canonical_factor(kernel), bw.source)
    return bw


def initial_beta(d: Dataset, init) -> np.ndarray:
    if isinstance(init, str):
        if init == "median_regression":
            return fit_qr(d).beta
        if init == "ols":
            return fit_mr(d).beta
        if init == "zeros":
            return np.zeros(d.p)
        raise ArgumentError(f"unknown init rule {init!r}")
    beta0 = np.asarray(init, dtype=float).ravel()
    if beta0.size != d.p:
        raise ArgumentError(f"initial beta has length {beta0.size}, expected {d.p}")
    return beta0


def fit_dr(d: Dataset, cfg: DrConfig = DrConfig()) -> FitResult:
    """Distribution regression.

    The response is first centered at its median (the objective ignores
    the intercept, so this only conditions the numbers).  Slopes start
    from ``cfg.init``; the bandwidth is chosen once from the starting
    residuals and held fixed while the kernel log-likelihood is maximized.
    The intercept is recovered afterwards from ``Y - X beta``.
    """
    n, p = d.n, d.p
    if n < max(10, p + 2):
        raise ArgumentError(f"distribution regression needs n >= max(10, p+2); got n={n}, p={p}")
    _design(d.X)
    center = float(np.median(d.Y))
    dc = d.with_response(d.Y - center)
    beta = initial_beta(dc, cfg.init)
    resid0 = dc.Y - dc.X @ beta
    if np.ptp(resid0) <= _EXACT_FIT_RTOL * max(1.0, float(np.max(np.abs(dc.Y)))):
        raise DegenerateDataError("starting residuals have no spread: the data are fitted exactly")
    bw = select_bandwidth(resid0, cfg.bandwidth, cfg.kernel)
    ds = build_diffset(dc)
    bandwidths = [bw.h]
    for round_ in range(cfg.iterate_bandwidth + 1):
        if round_ > 0:
            bw = select_bandwidth(dc.Y - dc.X @ beta, cfg.bandwidth, cfg.kernel)
            bandwidths.append(bw.h)
        lcfg = LikelihoodConfig(bw.h, cfg.kernel, cfg.eps)
        res = bb_maximize(None, None, beta, cfg.optim,
                          value_and_grad=lambda b, lcfg=lcfg: loglik_and_grad(ds, b, lcfg))
        beta = res.x
    nu = center + estimate_intercept(dc.Y - dc.X @ beta, cfg.intercept)
    return FitResult("DR", beta, nu, d.Y - nu - d.X @ beta, loglik=res.value, optim=res,
                     h_used=bw, info={"bandwidths": bandwidths, "center": center})


def fit(d: Dataset, method: str, cfg: DrConfig = DrConfig(), tau: float = 0.5) -> FitResult:
    method = method.upper()
    if method == "DR":
        return fit_dr(d, cfg)
    if method == "MR":
        return fit_mr(d)
    if method == "QR":
        return fit_qr(d, tau)
    raise ArgumentError(f"unknown method {method!r}")


def predict(fit: FitResult, Xnew) -> np.ndarray:
    Xnew = np.asarray(Xnew, dtype=float)
    if Xnew.ndim == 1:
        Xnew = Xnew[None, :]
    if Xnew.shape[1] != fit.beta.size:
        raise ArgumentError(f"Xnew has {Xnew.shape[1]} columns, fit has {fit.beta.size} slopes")
    return fit.intercept + Xnew @ fit.beta


def residual_density_curve(fit: FitResult, grid, kernel: str = kde.GAUSSIAN) -> np.ndarray:
    """Plug-in KDE of the fitted residuals on ``grid``; rows are ``(z, density)``."""
    grid = np.asarray(grid, dtype=float).ravel()
    bw = select_bandwidth(fit.residuals, "plugin", kernel)
    dens = kde.kde_eval(fit.residuals, bw.h, grid, kernel)
    return np.column_stack([grid, dens])
