"""Datasets, CSV ingestion, standardization and the held-out split."""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    ArgumentError,
    DataError,
    DegenerateDataError,
    EmptyDataError,
    FileIOError,
    NonNumericResponseError,
)

log = logging.getLogger(__name__)

MISSING = ("", "NA", "na", "NaN", "nan")


@dataclass
class Dataset:
    """Predictor matrix ``X`` (n x p) and response ``Y`` (n,)."""

    X: np.ndarray
    Y: np.ndarray
    feature_names: list[str] | None = None
    response_name: str = "y"
    dropped_rows: int = 0

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        Y = np.asarray(self.Y, dtype=float).ravel()
        if X.ndim == 1:
            X = X[:, None]
        if X.ndim != 2:
            raise ArgumentError(f"X must be two-dimensional, got shape {X.shape}")
        if X.shape[0] != Y.size:
            raise ArgumentError(f"X has {X.shape[0]} rows but Y has {Y.size} entries")
        if Y.size < 2:
            raise ArgumentError(f"need at least 2 observations, got {Y.size}")
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(Y))):
            raise DataError("dataset contains non-finite values")
        self.X, self.Y = X, Y
        if self.feature_names is None:
            self.feature_names = [f"x{j + 1}" for j in range(X.shape[1])]
        elif len(self.feature_names) != X.shape[1]:
            raise ArgumentError("feature_names length does not match the number of columns")

    @property
    def n(self) -> int:
        return self.Y.size

    @property
    def p(self) -> int:
        return self.X.shape[1]

    def subset(self, rows) -> "Dataset":
        return Dataset(self.X[rows], self.Y[rows], list(self.feature_names), self.response_name)

    def with_response(self, Y) -> "Dataset":
        return Dataset(self.X, Y, list(self.feature_names), self.response_name)


def _resolve_column(header: list[str], column) -> int:
    if isinstance(column, int) or (isinstance(column, str) and column.lstrip("-").isdigit()
                                   and column not in header):
        idx = int(column)
        if not -len(header) <= idx < len(header):
            raise ArgumentError(f"column index {idx} out of range for {len(header)} columns")
        return idx % len(header)
    if column not in header:
        raise ArgumentError(f"column {column!r} not found; available: {header}")
    return header.index(column)


def load_csv(path, response_column="y", predictors=None) -> Dataset:
    """Read a header + numeric-rows CSV file into a :class:`Dataset`.

    Rows with a missing cell (empty or ``NA``) are dropped and the count is
    logged.  Any other non-numeric cell is an error whose message lists the
    offending (1-based, header excluded) row numbers.  ``predictors=[]``
    reads the response column alone.
    """
    try:
        with open(path, newline="") as fh:
            rows = [r for r in csv.reader(fh) if r and not r[0].startswith("#")]
    except OSError as exc:
        raise FileIOError(f"cannot read {path}: {exc}") from exc
    if not rows:
        raise EmptyDataError(f"{path} is empty")
    header = [h.strip() for h in rows[0]]
    body = rows[1:]
    yi = _resolve_column(header, response_column)
    if predictors is None:
        xi = [j for j in range(len(header)) if j != yi]
    else:
        xi = [_resolve_column(header, c) for c in predictors]
    if not xi and predictors is None:
        raise DataError("no predictor columns")

    values, dropped, bad_rows, bad_response = [], 0, [], []
    for lineno, row in enumerate(body, start=1):
        cells = [c.strip() for c in row]
        if len(cells) != len(header):
            bad_rows.append(lineno)
            continue
        wanted = [yi] + xi
        if any(cells[j] in MISSING for j in wanted):
            dropped += 1
            continue
        try:
            values.append([float(cells[j]) for j in wanted])
        except ValueError:
            try:
                float(cells[yi])
            except ValueError:
                bad_response.append(lineno)
            else:
                bad_rows.append(lineno)
    if bad_response:
        raise NonNumericResponseError(
            f"non-numeric response {header[yi]!r} in rows {bad_response[:20]}")
    if bad_rows:
        raise DataError(f"malformed or non-numeric cells in rows {bad_rows[:20]}")
    if dropped:
        log.info("dropped %d row(s) with missing values", dropped)
    if len(values) < 2:
        raise EmptyDataError(f"{path}: fewer than 2 complete rows after removing missing values")
    arr = np.array(values, dtype=float)
    ds = Dataset(arr[:, 1:], arr[:, 0], [header[j] for j in xi], header[yi])
    ds.dropped_rows = dropped
    return ds


def save_csv(ds: Dataset, path) -> None:
    """Write ``ds`` with the response in the first column (round-trips exactly)."""
    try:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow([ds.response_name] + list(ds.feature_names))
            for y, x in zip(ds.Y, ds.X):
                w.writerow([repr(float(y))] + [repr(float(v)) for v in x])
    except OSError as exc:
        raise FileIOError(f"cannot write {path}: {exc}") from exc


@dataclass
class Standardization:
    """Column means and sample standard deviations used to standardize ``X``."""

    mean: np.ndarray
    scale: np.ndarray
    ddof: int = 1
    names: list[str] = field(default_factory=list)

    def apply(self, X) -> np.ndarray:
        return (np.asarray(X, dtype=float) - self.mean) / self.scale

    def coefficients_to_original(self, beta, intercept):
        """Map slopes/intercept fitted on standardized columns back to raw units."""
        beta = np.asarray(beta, dtype=float)
        raw = beta / self.scale
        return raw, float(intercept - raw @ self.mean)


def standardize(ds: Dataset, ddof: int = 1) -> tuple[Dataset, Standardization]:
    """Center every predictor column and scale it to unit sample variance."""
    mean = ds.X.mean(axis=0)
    centered = ds.X - mean
    scale = np.sqrt((centered**2).sum(axis=0) / (ds.n - ddof))
    zero = [name for name, s in zip(ds.feature_names, scale) if not s > 0]
    if zero:
        raise DegenerateDataError(f"zero-variance predictor column(s): {zero}")
    tr = Standardization(mean, scale, ddof, list(ds.feature_names))
    return Dataset(centered / scale, ds.Y.copy(), list(ds.feature_names), ds.response_name), tr


def holdout_size(n: int) -> int:
    """Number of held-out rows, ``ceil(n / 9)``."""
    return math.ceil(n / 9)


def split_last(ds: Dataset) -> tuple[Dataset, Dataset]:
    """Hold out the final ``ceil(n/9)`` rows in file order."""
    if ds.n < 10:
        raise ArgumentError(f"split needs n >= 10, got {ds.n}")
    m = holdout_size(ds.n)
    return ds.subset(slice(0, ds.n - m)), ds.subset(slice(ds.n - m, ds.n))
