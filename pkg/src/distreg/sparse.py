"""Adaptive-LASSO penalized regression by LQA coordinate descent, with GIC tuning.

The penalized objective is ``loss(beta) + lam * sum_j w_j |b_j|`` where
``loss`` is ``-l(beta)/n`` for distribution regression.  Each absolute
value is replaced by a quadratic around the current outer iterate
``b^(k)`` (local quadratic approximation) and coordinates are updated
one at a time by a bounded 1-D minimization:

``eq9_iterate``
    ``lam * b_j^2 / (2 [b_j^(k)]^2)``; the adaptive weight is the current
    iterate itself (gamma = 1), so no unpenalized pilot fit is needed.
``fixed_unpenalized``
    ``lam * w_j * b_j^2 / (2 |b_j^(k)|)`` with ``w_j = 1/|bhat_j|^gamma``
    from the unpenalized fit.

Coordinates whose magnitude falls to ``zero_threshold`` are set to exactly
zero and stay there for the rest of the fit.

Mean (least squares) and median (check loss) regression losses are
available through the same machinery for baseline comparisons.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kde
from .data import Dataset
from .errors import ArgumentError, SelectionError
from .likelihood import DiffSet, LikelihoodConfig, build_diffset, loglik_and_grad
from .optim import scalar_minimize
from .regress import DrConfig, check_loss, fit_dr, fit_mr, fit_qr, select_bandwidth

WEIGHT_MODES = ("eq9_iterate", "fixed_unpenalized")
_WEIGHT_ALIASES = {"eq9": "eq9_iterate", "fixed": "fixed_unpenalized"}
_PERFECT_FIT_RTOL = 1e-10


@dataclass(frozen=True)
class PenaltyConfig:
    """Tuning of the adaptive-LASSO fit and of the lambda path.

    ``lambda_grid=None`` means ``n_lambda`` log-spaced values spanning
    ``lambda_range`` times the max-abs gradient of the loss at zero.
    """

    gamma: float = 1.0
    lambda_grid: tuple | None = None
    n_lambda: int = 50
    lambda_range: tuple = (1e-4, 1.0)
    zero_threshold: float = 1e-6
    weight_mode: str = "eq9_iterate"
    max_outer: int = 100
    max_inner: int = 50
    tol: float = 1e-6
    scalar_tol: float = 1e-9
    gic_intercept: bool = False

    def __post_init__(self):
        mode = _WEIGHT_ALIASES.get(self.weight_mode, self.weight_mode)
        if mode not in WEIGHT_MODES:
            raise ArgumentError(f"unknown weight mode {self.weight_mode!r}")
        object.__setattr__(self, "weight_mode", mode)
        if not self.gamma > 0:
            raise ArgumentError("gamma must be positive")
        if self.lambda_grid is not None:
            grid = tuple(float(v) for v in self.lambda_grid)
            if not grid or any(v < 0 for v in grid) or list(grid) != sorted(grid):
                raise ArgumentError("lambda_grid must be non-empty, non-negative and ascending")
            object.__setattr__(self, "lambda_grid", grid)
        if self.n_lambda < 1 or not (0 < self.lambda_range[0] <= self.lambda_range[1]):
            raise ArgumentError("invalid automatic lambda grid settings")
        if not (self.zero_threshold > 0 and self.tol > 0 and self.scalar_tol > 0):
            raise ArgumentError("thresholds and tolerances must be positive")


@dataclass
class SparseFit:
    beta: np.ndarray
    active_set: tuple
    lambda_: float
    gic: float
    sigma2_hat: float
    s_lambda: int
    outer_iters: int
    converged: bool
    intercept: float = 0.0
    method: str = "DR"
    degenerate: bool = False
    history: list = field(default_factory=list)


@dataclass
class PenaltyPath:
    lambdas: np.ndarray
    fits: list
    selected: int

    @property
    def best(self) -> SparseFit:
        return self.fits[self.selected]

    @property
    def gics(self) -> np.ndarray:
        return np.array([f.gic for f in self.fits])


def gic(d: Dataset, beta, n: int | None = None, p: int | None = None,
        intercept: float = 0.0) -> float:
    """Generalized information criterion ``log s2 + s (log log n / n) log(max(p, n))``.

    ``s2 = sum (Y - intercept - X beta)^2 / n``; the intercept defaults to
    zero.  Returns ``-inf`` for a perfect fit, meaning residuals at round-off
    level relative to the response.
    """
    n = d.n if n is None else int(n)
    p = d.p if p is None else int(p)
    if n < 3:
        raise ArgumentError("GIC needs n >= 3 (log log n must be positive)")
    beta = np.asarray(beta, dtype=float)
    s2 = float(np.sum((d.Y - intercept - d.X @ beta) ** 2)) / n
    if math.sqrt(s2) <= _PERFECT_FIT_RTOL * float(np.max(np.abs(d.Y))):
        return -math.inf
    s = int(np.count_nonzero(beta))
    return math.log(s2) + s * math.log(math.log(n)) / n * math.log(max(p, n))


# ---------------------------------------------------------------------------
# losses


class _DRLoss:
    """``-l(beta)/n`` with the pairwise residual matrix kept in sync with beta."""

    name = "DR"

    def __init__(self, ds: DiffSet, lcfg: LikelihoodConfig):
        self.ds, self.lcfg, self.n = ds, lcfg, ds.n
        # pairwise differences in bandwidth units
        self._dxh = ds.block(0, ds.n)[1] / lcfg.h

    def reset(self, beta):
        self.U = self.ds.residual_matrix(beta) / self.lcfg.h

    def value(self, beta) -> float:
        return -loglik_and_grad(self.ds, beta, self.lcfg)[0] / self.n

    def slice(self, j, bj):
        dxj_h = self._dxh[j]
        rest_h = self.U + dxj_h * bj
        n, cfg = self.n, self.lcfg
        const = 1.0 / (n * cfg.h)

        def f(b):
            u = rest_h - dxj_h * b
            dens = kde.kernel_eval(cfg.kernel, u).sum(axis=1) * const + cfg.eps
            return -float(np.sum(np.log(dens))) / n

        if cfg.kernel != kde.GAUSSIAN:
            return f, None, rest_h

        gconst = const / np.sqrt(2.0 * np.pi)

        def fd(b):
            # value, first and second derivative in b; du/db = -dxj/h
            u = dxj_h * b
            np.subtract(rest_h, u, out=u)
            k = u * u
            k *= -0.5
            np.exp(k, out=k)
            dens = k.sum(axis=1) * gconst + cfg.eps
            ku = k * u
            d1 = (ku * dxj_h).sum(axis=1) * gconst
            k *= u * u - 1.0
            d2 = (k * dxj_h * dxj_h).sum(axis=1) * gconst
            r1 = d1 / dens
            value = -float(np.sum(np.log(dens))) / n
            grad = -float(np.sum(r1)) / n
            hess = -float(np.sum(d2 / dens - r1 * r1)) / n
            return value, grad, hess

        return f, fd, rest_h

    def commit(self, j, rest_h, b):
        self.U = rest_h - self._dxh[j] * b

    def grad_at_zero(self):
        return -loglik_and_grad(self.ds, np.zeros(self.ds.p), self.lcfg)[1] / self.n


class _MRLoss:
    """Half mean squared residual on centered data (intercept profiled out)."""

    name = "MR"

    def __init__(self, X, Y):
        self.xm, self.ym = X.mean(axis=0), Y.mean()
        self.X, self.Y = X - self.xm, Y - self.ym

    def reset(self, beta):
        self.r = self.Y - self.X @ beta

    def value(self, beta) -> float:
        return 0.5 * float(np.mean((self.Y - self.X @ beta) ** 2))

    def slice(self, j, bj):
        rest = self.r + self.X[:, j] * bj
        xj = self.X[:, j]
        return (lambda b: 0.5 * float(np.mean((rest - xj * b) ** 2))), None, rest

    def commit(self, j, rest, b):
        self.r = rest - self.X[:, j] * b

    def grad_at_zero(self):
        return -(self.X.T @ self.Y) / self.Y.size

    def intercept(self, beta) -> float:
        return float(self.ym - self.xm @ beta)


class _QRLoss:
    """Mean check loss; the intercept is an extra unpenalized coordinate."""

    name = "QR"

    def __init__(self, X, Y, tau=0.5, scalar_tol=1e-9):
        self.X, self.Y, self.tau, self.tol = X, Y, tau, scalar_tol
        self.nu = float(np.quantile(Y, tau))

    def reset(self, beta):
        self.r = self.Y - self.nu - self.X @ beta

    def value(self, beta) -> float:
        return check_loss(self.Y - self.nu - self.X @ beta, self.tau) / self.Y.size

    def slice(self, j, bj):
        rest = self.r + self.X[:, j] * bj
        xj, tau, n = self.X[:, j], self.tau, self.Y.size
        return (lambda b: check_loss(rest - xj * b, tau) / n), None, rest

    def commit(self, j, rest, b):
        self.r = rest - self.X[:, j] * b

    def update_intercept(self):
        # exact 1-D minimizer of the check loss in the intercept
        base = self.r + self.nu
        self.nu = float(np.quantile(base, self.tau, method="inverted_cdf"))
        self.r = base - self.nu

    def grad_at_zero(self):
        r = self.Y - np.quantile(self.Y, self.tau)
        return -(self.X.T @ (self.tau - (r < 0))) / self.Y.size

    def intercept(self, beta) -> float:
        return self.nu


def _ridge(X, Y):
    Xc, Yc = X - X.mean(axis=0), Y - Y.mean()
    alpha = float(np.trace(Xc.T @ Xc)) / X.shape[1]
    return np.linalg.solve(Xc.T @ Xc + alpha * np.eye(X.shape[1]), Xc.T @ Yc)


@dataclass
class SparseProblem:
    """Everything a penalized fit needs that does not depend on lambda.

    Built once per dataset by :func:`prepare`; holds the loss, the
    unpenalized pilot estimate (or a ridge start when ``p >= n - 1``) and,
    for distribution regression, the frozen bandwidth.
    """

    d: Dataset
    loss: object
    beta_init: np.ndarray
    unpenalized: np.ndarray | None
    center: float = 0.0
    bandwidth: kde.Bandwidth | None = None
    method: str = "DR"

    def intercept(self, beta, rule="mean") -> float:
        if self.method == "DR":
            resid = self.d.Y - self.center - self.d.X @ beta
            extra = np.mean(resid) if rule in ("mean", "mean_residual") else np.median(resid)
            return float(self.center + extra)
        return self.loss.intercept(beta)


def prepare(d: Dataset, drcfg: DrConfig = DrConfig(), method: str = "DR",
            scalar_tol: float = 1e-9) -> SparseProblem:
    method = method.upper()
    high_dim = d.p >= d.n - 1
    if method == "DR":
        if not high_dim:
            pilot = fit_dr(d, drcfg)
            center = pilot.info["center"]
            beta0, bw = pilot.beta, pilot.h_used
        else:
            center = float(np.median(d.Y))
            beta0 = _ridge(d.X, d.Y - center)
            bw = select_bandwidth(d.Y - center - d.X @ beta0, drcfg.bandwidth, drcfg.kernel)
        dc = d.with_response(d.Y - center)
        loss = _DRLoss(build_diffset(dc), LikelihoodConfig(bw.h, drcfg.kernel, drcfg.eps))
        return SparseProblem(d, loss, beta0, None if high_dim else beta0.copy(), center, bw, "DR")
    if method == "MR":
        beta0 = _ridge(d.X, d.Y) if high_dim else fit_mr(d).beta
        return SparseProblem(d, _MRLoss(d.X, d.Y), beta0, None if high_dim else beta0.copy(),
                             method="MR")
    if method == "QR":
        if high_dim:
            beta0 = _ridge(d.X, d.Y)
        else:
            beta0 = fit_qr(d).beta
        loss = _QRLoss(d.X, d.Y, scalar_tol=scalar_tol)
        return SparseProblem(d, loss, beta0, None if high_dim else beta0.copy(), method="QR")
    raise ArgumentError(f"unknown method {method!r}")


def _weights(prob: SparseProblem, cfg: PenaltyConfig) -> np.ndarray | None:
    if cfg.weight_mode != "fixed_unpenalized":
        return None
    if prob.unpenalized is None:
        raise ArgumentError("fixed_unpenalized weights need an unpenalized fit (p < n - 1)")
    with np.errstate(divide="ignore"):
        return 1.0 / np.abs(prob.unpenalized) ** cfg.gamma


def _penalty_coef(j, lam, cfg: PenaltyConfig, anchor, weights) -> float:
    """Coefficient ``c`` of the LQA surrogate ``c * b_j^2``."""
    if cfg.weight_mode == "eq9_iterate":
        return lam / (2.0 * anchor[j] ** 2)
    return lam * weights[j] / (2.0 * abs(anchor[j]))


def _minimize_coordinate(fun, center: float, tol: float) -> float:
    half = 1.0 + 2.0 * abs(center)
    b = center
    for _ in range(30):
        lo, hi = center - half, center + half
        b = scalar_minimize(fun, (lo, hi), tol)
        if min(b - lo, hi - b) > 1e-3 * half:
            return b
        center, half = b, 2.0 * half
    return b


def _newton_coordinate(fd, c: float, b: float, tol: float) -> float | None:
    """Damped Newton on ``fd(b) + c b^2``; ``None`` when curvature is not positive."""
    v, g, H = fd(b)
    v, g, H = v + c * b * b, g + 2 * c * b, H + 2 * c
    for _ in range(100):
        if not (H > 0 and np.isfinite(H) and np.isfinite(g)):
            return None
        step = -g / H
        while True:
            trial = b + step
            vt, gt, Ht = fd(trial)
            vt, gt, Ht = vt + c * trial * trial, gt + 2 * c * trial, Ht + 2 * c
            if vt <= v + 1e-13 * max(1.0, abs(v)):
                break
            step *= 0.5
            if abs(step) <= tol * (1.0 + abs(b)):
                return b
        b, v, g, H = trial, vt, gt, Ht
        if abs(step) <= tol * (1.0 + abs(b)):
            return b
    return None


def _coordinate_min(f, fd, c: float, b0: float, tol: float) -> float:
    if fd is not None:
        b = _newton_coordinate(fd, c, b0, tol)
        if b is not None:
            return b
    return _minimize_coordinate(lambda t: f(t) + c * t * t, b0, tol)


def _update(loss, beta, j, lam, cfg, anchor, weights) -> float:
    f, fd, rest = loss.slice(j, beta[j])
    c = _penalty_coef(j, lam, cfg, anchor, weights)
    b = _coordinate_min(f, fd, c, beta[j], cfg.scalar_tol)
    if abs(b) <= cfg.zero_threshold:
        b = 0.0
    loss.commit(j, rest, b)
    return b


def coordinate_update(ds: DiffSet, beta, j: int, lam: float, cfg: PenaltyConfig,
                      lcfg: LikelihoodConfig, anchor=None, weights=None) -> float:
    """One LQA coordinate update for the distribution-regression loss.

    ``anchor`` is the outer iterate ``b^(k)`` the quadratic approximation is
    built around (defaults to ``beta``).  A coordinate at or below the zero
    threshold is frozen and returns 0.  The returned value is not
    thresholded.
    """
    beta = np.asarray(beta, dtype=float)
    anchor = beta if anchor is None else np.asarray(anchor, dtype=float)
    if abs(beta[j]) <= cfg.zero_threshold or abs(anchor[j]) <= cfg.zero_threshold:
        return 0.0
    if cfg.weight_mode == "fixed_unpenalized" and weights is None:
        raise ArgumentError("fixed_unpenalized mode needs weights")
    loss = _DRLoss(ds, lcfg)
    loss.reset(beta)
    f, fd, _ = loss.slice(j, beta[j])
    c = _penalty_coef(j, lam, cfg, anchor, weights)
    return _coordinate_min(f, fd, c, beta[j], cfg.scalar_tol)


def penalized_objective(prob: SparseProblem, beta, lam: float, cfg: PenaltyConfig) -> float:
    """Objective the LQA iterations descend on.

    ``fixed_unpenalized``: ``loss + lam sum w_j |b_j|``.
    ``eq9_iterate``: the iteration is a majorize-minimize scheme for
    ``loss + lam sum_{b_j != 0} log |b_j|``.
    """
    beta = np.asarray(beta, dtype=float)
    value = prob.loss.value(beta)
    nz = beta != 0
    if cfg.weight_mode == "fixed_unpenalized":
        w = _weights(prob, cfg)
        return value + lam * float(np.sum(w[nz] * np.abs(beta[nz])))
    return value + lam * float(np.sum(np.log(np.abs(beta[nz]))))


def _fit(prob: SparseProblem, lam: float, cfg: PenaltyConfig, start) -> SparseFit:
    loss = prob.loss
    beta = np.array(start, dtype=float)
    beta[np.abs(beta) <= cfg.zero_threshold] = 0.0
    weights = _weights(prob, cfg)
    loss.reset(beta)
    converged, outer = False, 0
    history = []
    for outer in range(1, cfg.max_outer + 1):
        anchor = beta.copy()
        for _ in range(cfg.max_inner):
            before = beta.copy()
            for j in np.flatnonzero(beta):
                beta[j] = _update(loss, beta, j, lam, cfg, anchor, weights)
            if isinstance(loss, _QRLoss):
                loss.update_intercept()
            if np.max(np.abs(beta - before), initial=0.0) < cfg.tol:
                break
        history.append((penalized_objective(prob, beta, lam, cfg), int(np.count_nonzero(beta))))
        if np.max(np.abs(beta - anchor), initial=0.0) < cfg.tol:
            converged = True
            break
    nu = prob.intercept(beta)
    g = gic(prob.d, beta, intercept=nu if cfg.gic_intercept else 0.0)
    resid = prob.d.Y - (nu if cfg.gic_intercept else 0.0) - prob.d.X @ beta
    s2 = float(np.mean(resid**2))
    active = tuple(int(j) for j in np.flatnonzero(beta))
    return SparseFit(beta, active, float(lam), g, s2, len(active), outer, converged, nu,
                     prob.method, degenerate=not np.isfinite(g), history=history)


def fit_alasso(d: Dataset, lam: float, cfg: PenaltyConfig = PenaltyConfig(),
               drcfg: DrConfig = DrConfig(), method: str = "DR", start=None,
               problem: SparseProblem | None = None) -> SparseFit:
    """Adaptive-LASSO fit at a single ``lam``.

    Starts from the unpenalized estimate (ridge when ``p >= n - 1``)
    unless ``start`` is given; ``problem`` lets callers reuse a prepared
    :class:`SparseProblem` across many lambdas.
    """
    if lam < 0:
        raise ArgumentError("lambda must be non-negative")
    prob = problem or prepare(d, drcfg, method, cfg.scalar_tol)
    return _fit(prob, lam, cfg, prob.beta_init if start is None else start)


def fit_dr_alasso(d: Dataset, lam: float, cfg: PenaltyConfig = PenaltyConfig(),
                  drcfg: DrConfig = DrConfig(), start=None,
                  problem: SparseProblem | None = None) -> SparseFit:
    """Adaptive-LASSO distribution regression at a single ``lam``."""
    return fit_alasso(d, lam, cfg, drcfg, "DR", start, problem)


def lambda_grid(prob: SparseProblem, cfg: PenaltyConfig) -> np.ndarray:
    if cfg.lambda_grid is not None:
        return np.array(cfg.lambda_grid, dtype=float)
    scale = float(np.max(np.abs(prob.loss.grad_at_zero())))
    if not (np.isfinite(scale) and scale > 0):
        scale = 1.0
    lo, hi = cfg.lambda_range
    return scale * np.logspace(math.log10(lo), math.log10(hi), cfg.n_lambda)


def select_lambda(d: Dataset, cfg: PenaltyConfig = PenaltyConfig(),
                  drcfg: DrConfig = DrConfig(), method: str = "DR",
                  problem: SparseProblem | None = None) -> PenaltyPath:
    """Fit the whole lambda grid with warm starts and pick the GIC minimizer.

    The grid is traversed in ascending order, each fit starting from the
    previous solution.  Ties go to the smaller lambda; degenerate fits
    (perfect interpolation) are never selected.
    """
    prob = problem or prepare(d, drcfg, method, cfg.scalar_tol)
    grid = lambda_grid(prob, cfg)
    if grid.size == 0:
        raise ArgumentError("empty lambda grid")
    fits, start = [], prob.beta_init
    for lam in grid:
        fit = _fit(prob, lam, cfg, start)
        fits.append(fit)
        start = fit.beta
    scores = np.array([f.gic if not f.degenerate else np.inf for f in fits])
    if not np.any(np.isfinite(scores)):
        raise SelectionError("every fit on the lambda path is degenerate")
    return PenaltyPath(grid, fits, int(np.argmin(scores)))
