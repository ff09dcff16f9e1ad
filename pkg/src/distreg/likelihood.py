"""Pairwise-difference kernel log-likelihood and its gradient.

For slopes ``beta`` the residual of observation j is
``e_j = Y_j - nu - x_j' beta``; the intercept cancels in the pairwise
differences ``e_j - e_i = (Y_j - Y_i) - (x_j - x_i)' beta`` so the
objective

    l(beta) = sum_j log[ 1/(n h) sum_i K((e_j - e_i)/h) + eps ]

depends on the data only through ``dy[j, i] = Y_j - Y_i`` and
``dx[j, i] = x_j - x_i``.  The inner sum includes ``i == j``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kde
from .data import Dataset
from .errors import ArgumentError

DEFAULT_MATERIALIZE_CAP = 2000
_ROW_BLOCK = 256


@dataclass(frozen=True)
class LikelihoodConfig:
    h: float
    kernel: str = kde.GAUSSIAN
    eps: float = kde.DEFAULT_FLOOR

    def __post_init__(self):
        h = float(self.h)
        if not (np.isfinite(h) and h > 0):
            raise ArgumentError(f"bandwidth must be positive, got {self.h!r}")
        object.__setattr__(self, "h", h)
        kde.check_kernel(self.kernel)
        kde.check_floor(self.eps)


class DiffSet:
    """All ordered pairwise differences of a dataset.

    Up to ``cap`` observations the differences are stored (``O(n^2 p)``
    memory); beyond that they are regenerated block by block on each
    evaluation.  Both paths perform identical floating point operations.
    """

    def __init__(self, X, Y, cap: int = DEFAULT_MATERIALIZE_CAP):
        self.X = np.array(X, dtype=float)
        self.Y = np.array(Y, dtype=float).ravel()
        self.n, self.p = self.X.shape
        self.materialized = self.n <= cap
        if self.materialized:
            self._dy = self.Y[:, None] - self.Y[None, :]
            # (p, n, n) so that each coordinate slice is contiguous
            self._dxk = np.ascontiguousarray(
                np.moveaxis(self.X[:, None, :] - self.X[None, :, :], 2, 0))

    @property
    def dy(self) -> np.ndarray:
        """``dy[j, i] = Y_j - Y_i``."""
        if self.materialized:
            return self._dy
        return self.Y[:, None] - self.Y[None, :]

    @property
    def dx(self) -> np.ndarray:
        """``dx[j, i, :] = x_j - x_i``, shape (n, n, p)."""
        if self.materialized:
            return np.moveaxis(self._dxk, 0, 2)
        return self.X[:, None, :] - self.X[None, :, :]

    def blocks(self):
        for lo in range(0, self.n, _ROW_BLOCK):
            yield lo, min(lo + _ROW_BLOCK, self.n)

    def block(self, lo: int, hi: int):
        """Return ``(dy, dxk)`` for rows ``lo:hi``; ``dxk`` has shape (p, rows, n)."""
        if self.materialized:
            return self._dy[lo:hi], self._dxk[:, lo:hi]
        dy = self.Y[lo:hi, None] - self.Y[None, :]
        dxk = np.moveaxis(self.X[lo:hi, None, :] - self.X[None, :, :], 2, 0)
        return dy, dxk

    def residual_block(self, beta: np.ndarray, lo: int, hi: int) -> np.ndarray:
        dy, dxk = self.block(lo, hi)
        r = dy.copy()
        for k in range(self.p):
            r -= dxk[k] * beta[k]
        return r

    def residual_matrix(self, beta) -> np.ndarray:
        beta = _check_beta(self, beta)
        return np.vstack([self.residual_block(beta, lo, hi) for lo, hi in self.blocks()])


def build_diffset(d: Dataset, cap: int = DEFAULT_MATERIALIZE_CAP) -> DiffSet:
    if d.n < 2:
        raise ArgumentError(f"need at least 2 observations, got {d.n}")
    return DiffSet(d.X, d.Y, cap=cap)


def _check_beta(ds: DiffSet, beta) -> np.ndarray:
    beta = np.asarray(beta, dtype=float).ravel()
    if beta.size != ds.p:
        raise ArgumentError(f"beta has length {beta.size}, expected {ds.p}")
    return beta


def row_densities(ds: DiffSet, beta, cfg: LikelihoodConfig) -> np.ndarray:
    """Floored KDE of the residuals evaluated at every residual.

    Row sums are correctly rounded (``math.fsum``), so the result does not
    depend on the order of the observations.
    """
    beta = _check_beta(ds, beta)
    h = cfg.h
    out = np.empty(ds.n)
    for lo, hi in ds.blocks():
        k = kde.kernel_eval(cfg.kernel, ds.residual_block(beta, lo, hi) / h)
        out[lo:hi] = [math.fsum(row) for row in k]
    return out / (ds.n * h) + cfg.eps


def loglik(ds: DiffSet, beta, cfg: LikelihoodConfig) -> float:
    """Kernel log-likelihood of the pairwise residual differences.

    Exactly invariant under row permutations and response shifts that
    leave the pairwise differences unchanged.
    """
    return math.fsum(np.log(row_densities(ds, beta, cfg)))


def loglik_and_grad(ds: DiffSet, beta, cfg: LikelihoodConfig) -> tuple[float, np.ndarray]:
    beta = _check_beta(ds, beta)
    n, h = ds.n, cfg.h
    logf = np.empty(n)
    grad_rows = np.empty((n, ds.p))
    for lo, hi in ds.blocks():
        dy, dxk = ds.block(lo, hi)
        r = dy.copy()
        for k in range(ds.p):
            r -= dxk[k] * beta[k]
        u = r / h
        f = kde.kernel_eval(cfg.kernel, u).sum(axis=1) / (n * h) + cfg.eps
        logf[lo:hi] = np.log(f)
        # d u_ji / d beta = -dx_ji / h
        w = kde.kernel_deriv(cfg.kernel, u) / (n * h * h * f[:, None])
        for k in range(ds.p):
            grad_rows[lo:hi, k] = -(w * dxk[k]).sum(axis=1)
    return float(np.sum(logf)), grad_rows.sum(axis=0)


def loglik_grad(ds: DiffSet, beta, cfg: LikelihoodConfig) -> np.ndarray:
    """Exact gradient of :func:`loglik` with respect to ``beta``."""
    return loglik_and_grad(ds, beta, cfg)[1]


class CoordinateSlice:
    """The log-likelihood as a function of one coordinate, others held fixed.

    Evaluations cost one ``n x n`` kernel pass; used by coordinate descent.
    """

    def __init__(self, ds: DiffSet, beta, j: int, cfg: LikelihoodConfig):
        beta = _check_beta(ds, beta)
        self.cfg = cfg
        self.n = ds.n
        dy, dxk = ds.block(0, ds.n)
        rest = dy.copy()
        for k in range(ds.p):
            if k != j:
                rest -= dxk[k] * beta[k]
        self.rest = rest
        self.dxj = np.array(dxk[j])

    def __call__(self, b: float) -> float:
        u = (self.rest - self.dxj * b) / self.cfg.h
        f = kde.kernel_eval(self.cfg.kernel, u).sum(axis=1) / (self.n * self.cfg.h) + self.cfg.eps
        return float(np.sum(np.log(f)))
