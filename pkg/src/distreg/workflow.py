"""Real-data workflow: train/test evaluation and density curves for plotting."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from . import kde
from .data import Dataset, Standardization, split_last, standardize
from .errors import ArgumentError, FileIOError
from .regress import DrConfig, FitResult, fit, predict, select_bandwidth
from .sparse import PenaltyConfig, select_lambda

DENSITY_POINTS = 512


def prediction_error(test: Dataset, fitted: FitResult) -> float:
    """Mean squared prediction error on ``test``."""
    resid = test.Y - predict(fitted, test.X)
    return float(np.mean(resid**2))


@dataclass
class EvalReport:
    n_train: int
    n_test: int
    pe: dict
    fits: dict
    sparse: bool
    standardization: Standardization | None = None
    lambdas: dict = field(default_factory=dict)
    names: list = field(default_factory=list)

    def coefficient_table(self, original_units: bool = False) -> list[tuple[str, str, float]]:
        """Rows ``(method, term, estimate)``; optionally mapped back to raw predictor units."""
        rows = []
        for m, f in self.fits.items():
            beta, nu = f.beta, f.intercept
            if original_units and self.standardization is not None:
                beta, nu = self.standardization.coefficients_to_original(beta, nu)
            names = self.names or [f"x{j + 1}" for j in range(beta.size)]
            rows.append((m, "intercept", float(nu)))
            rows.extend((m, name, float(b)) for name, b in zip(names, beta))
        return rows


def _sparse_fit(train: Dataset, method: str, penalty: PenaltyConfig, drcfg: DrConfig):
    path = select_lambda(train, penalty, drcfg, method=method)
    best = path.best
    res = FitResult(method, best.beta, best.intercept,
                    train.Y - best.intercept - train.X @ best.beta,
                    info={"lambda": best.lambda_, "gic": best.gic, "active": list(best.active_set)})
    return res, best.lambda_


def evaluate(d: Dataset, methods=("DR", "MR", "QR"), drcfg: DrConfig = DrConfig(),
             penalty: PenaltyConfig = PenaltyConfig(), do_standardize: bool = True,
             split: str = "last9", sparse: bool | None = None, tau: float = 0.5) -> EvalReport:
    """Standardize, hold out the last ``ceil(n/9)`` rows, fit, and score on the held-out rows.

    ``sparse=None`` switches to adaptive-LASSO fits (GIC-selected) when the
    training set has ``p >= n - 1``, where unpenalized fits are not defined.
    """
    tr = None
    if do_standardize:
        d, tr = standardize(d)
    if split == "last9":
        train, test = split_last(d)
    elif split == "none":
        train, test = d, d
    else:
        raise ArgumentError(f"unknown split {split!r}")
    if sparse is None:
        sparse = train.p >= train.n - 1
    pe, fits, lambdas = {}, {}, {}
    for m in methods:
        m = m.upper()
        if sparse:
            fits[m], lambdas[m] = _sparse_fit(train, m, penalty, drcfg)
        else:
            fits[m] = fit(train, m, drcfg, tau)
        pe[m] = prediction_error(test, fits[m])
    return EvalReport(train.n, test.n, pe, fits, sparse, tr, lambdas, list(d.feature_names))


def density_curve(values, kernel: str = kde.GAUSSIAN, points: int = DENSITY_POINTS):
    """Plug-in KDE of ``values`` on ``points`` equally spaced z in ``[min - 3h, max + 3h]``.

    Returns ``(grid, density, bandwidth)``.
    """
    values = np.asarray(values, dtype=float).ravel()
    if points < 2:
        raise ArgumentError("need at least 2 grid points")
    bw = select_bandwidth(values, "plugin", kernel)
    grid = np.linspace(values.min() - 3 * bw.h, values.max() + 3 * bw.h, points)
    return grid, kde.kde_eval(values, bw.h, grid, kernel), bw


def emit_density(values, path, kernel: str = kde.GAUSSIAN, header: dict | None = None) -> int:
    """Write the density curve of ``values`` as a ``z,density`` CSV; returns the row count."""
    grid, dens, bw = density_curve(values, kernel)
    try:
        with open(path, "w", newline="") as fh:
            for k, v in {**(header or {}), "bandwidth": bw.h, "kernel": kernel}.items():
                fh.write(f"# {k}: {v}\n")
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["z", "density"])
            for z, f in zip(grid, dens):
                w.writerow([repr(float(z)), repr(float(f))])
    except OSError as exc:
        raise FileIOError(f"cannot write {path}: {exc}") from exc
    return grid.size
