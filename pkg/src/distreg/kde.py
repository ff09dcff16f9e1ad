"""Kernels, the floored kernel density estimator and bandwidth selectors.

The density estimate used throughout the package is

    f(z) = 1/(n h) * sum_i K((z - z_i) / h) + eps

where ``eps`` is a tiny positive floor that keeps ``log f`` finite far
away from the data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate
from scipy.special import ndtr

from .errors import ArgumentError, DegenerateDataError

GAUSSIAN = "gaussian"
EPANECHNIKOV_SMOOTHED = "epanechnikov-smoothed"
KERNELS = (GAUSSIAN, EPANECHNIKOV_SMOOTHED)

DEFAULT_FLOOR = 1e-300

# sd of the gaussian the epanechnikov kernel is convolved with; makes K' continuous
_EPAN_SMOOTH = 0.1

_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)
_CHUNK = 2048


@dataclass(frozen=True)
class Bandwidth:
    """Kernel bandwidth together with the rule that produced it."""

    h: float
    source: str = "fixed"

    def __post_init__(self):
        if not (np.isfinite(self.h) and self.h > 0):
            raise ArgumentError(f"bandwidth must be positive and finite, got {self.h!r}")
        if self.source not in ("plugin", "silverman", "fixed"):
            raise ArgumentError(f"unknown bandwidth source {self.source!r}")

    def __float__(self):
        return float(self.h)


def check_kernel(kernel: str) -> str:
    if kernel not in KERNELS:
        raise ArgumentError(f"unknown kernel {kernel!r}; expected one of {KERNELS}")
    return kernel


def check_floor(eps: float) -> float:
    eps = float(eps)
    if not (0.0 < eps <= 1e-12):
        raise ArgumentError(f"density floor must lie in (0, 1e-12], got {eps!r}")
    return eps


def _gauss(z):
    return _INV_SQRT_2PI * np.exp(-0.5 * z * z)


def kernel_eval(kernel: str, z):
    """Evaluate the kernel ``K(z)``; works elementwise on arrays."""
    z = np.asarray(z, dtype=float)
    if kernel == GAUSSIAN:
        return _gauss(z)
    if kernel == EPANECHNIKOV_SMOOTHED:
        # 3/4 (1 - t^2) on [-1, 1] convolved with N(0, s^2), in closed form;
        # evaluated at |z| so symmetry holds bit for bit
        s = _EPAN_SMOOTH
        z = np.abs(z)
        a = (-1.0 - z) / s
        b = (1.0 - z) / s
        mass = ndtr(b) - ndtr(a)
        pa, pb = _gauss(a), _gauss(b)
        second = mass + a * pa - b * pb
        return np.maximum(0.75 * ((1.0 - z * z) * mass - 2.0 * z * s * (pa - pb) - s * s * second), 0.0)
    raise ArgumentError(f"unknown kernel {kernel!r}")


def kernel_deriv(kernel: str, z):
    """Evaluate ``K'(z)`` elementwise."""
    z = np.asarray(z, dtype=float)
    if kernel == GAUSSIAN:
        return -z * _gauss(z)
    if kernel == EPANECHNIKOV_SMOOTHED:
        s = _EPAN_SMOOTH
        sign, z = np.sign(z), np.abs(z)
        a = (-1.0 - z) / s
        b = (1.0 - z) / s
        return -1.5 * sign * (z * (ndtr(b) - ndtr(a)) + s * (_gauss(a) - _gauss(b)))
    raise ArgumentError(f"unknown kernel {kernel!r}")


@lru_cache(maxsize=None)
def _roughness_and_variance(kernel: str) -> tuple[float, float]:
    if kernel == GAUSSIAN:
        return 0.5 / math.sqrt(math.pi), 1.0
    lim = 1.0 + 12 * _EPAN_SMOOTH
    rk = integrate.quad(lambda t: float(kernel_eval(kernel, t)) ** 2, -lim, lim, limit=200)[0]
    mu2 = 0.2 + _EPAN_SMOOTH**2
    return rk, mu2


def canonical_factor(kernel: str) -> float:
    """Factor converting a gaussian-kernel bandwidth to an equivalent one for ``kernel``.

    Uses the canonical-bandwidth ratio ``(R(K) / mu2(K)^2)^(1/5)``.
    """
    check_kernel(kernel)
    rk, mu2 = _roughness_and_variance(kernel)
    rg, _ = _roughness_and_variance(GAUSSIAN)
    return ((rk / mu2**2) / rg) ** 0.2


def kde_eval(samples, h, z, kernel: str = GAUSSIAN, eps: float = DEFAULT_FLOOR):
    """Floored kernel density estimate at ``z``.

    Parameters
    ----------
    samples : array_like, shape (n,)
        Data the estimate is built from.
    h : float or Bandwidth
        Bandwidth.
    z : float or array_like
        Evaluation point(s).
    kernel : str
        Kernel name.
    eps : float
        Additive density floor.

    Returns
    -------
    float or ndarray
        ``1/(n h) sum_i K((z - samples_i)/h) + eps``, shaped like ``z``.
    """
    samples = np.asarray(samples, dtype=float).ravel()
    if samples.size == 0:
        raise ArgumentError("kde_eval needs at least one sample")
    h = float(h)
    if not (np.isfinite(h) and h > 0):
        raise ArgumentError(f"bandwidth must be positive, got {h!r}")
    zz = np.asarray(z, dtype=float)
    flat = zz.ravel()
    out = np.empty(flat.shape)
    scale = 1.0 / (samples.size * h)
    for lo in range(0, flat.size, _CHUNK):
        block = flat[lo:lo + _CHUNK]
        k = kernel_eval(kernel, (block[:, None] - samples[None, :]) / h)
        out[lo:lo + _CHUNK] = k.sum(axis=1) * scale + eps
    if zz.ndim == 0:
        return float(out[0])
    return out.reshape(zz.shape)


def _scale_estimate(x: np.ndarray) -> float:
    sd = float(np.std(x, ddof=1))
    q75, q25 = np.percentile(x, [75, 25])
    iqr = float(q75 - q25)
    if sd == 0.0 and iqr == 0.0:
        raise DegenerateDataError("sample has zero variance and zero interquartile range")
    if iqr == 0.0:
        return sd
    return min(sd, iqr / 1.349)


def _psi_hat(diffs_fn, n: int, g: float, order: int) -> float:
    """Binning-free estimate of the density functional psi_r = E f^(r)(X)."""
    total = 0.0
    for d in diffs_fn():
        u = d / g
        u2 = u * u
        if order == 4:
            poly = (u2 - 6.0) * u2 + 3.0
        else:
            poly = ((u2 - 15.0) * u2 + 45.0) * u2 - 15.0
        total += float(np.sum(poly * _gauss(u)))
    return total / (n * n * g ** (order + 1))


def bandwidth_plugin(samples) -> Bandwidth:
    """Two-stage direct plug-in bandwidth for the gaussian kernel.

    Starts from a normal-scale estimate of the eighth density derivative
    functional, then estimates psi_6 and psi_4 from the data with pilot
    bandwidths tuned for each, and finally plugs psi_4 into the AMISE
    optimal bandwidth formula.  Pairwise sums are exact (no binning).

    Raises
    ------
    ArgumentError
        Fewer than four samples.
    DegenerateDataError
        Zero variance and zero interquartile range.
    """
    x = np.asarray(samples, dtype=float).ravel()
    n = x.size
    if n < 4:
        raise ArgumentError(f"plug-in bandwidth needs n >= 4, got {n}")
    if not np.all(np.isfinite(x)):
        raise ArgumentError("samples contain non-finite values")
    scale = _scale_estimate(x)

    def diffs():
        # differences in units of the scale estimate
        for lo in range(0, n, _CHUNK):
            yield (x[lo:lo + _CHUNK, None] - x[None, :]) / scale

    psi8 = 105.0 / (32.0 * math.sqrt(math.pi))
    g1 = (30.0 * _INV_SQRT_2PI / (psi8 * n)) ** (1.0 / 9.0)
    psi6 = _psi_hat(diffs, n, g1, 6)
    if not psi6 < 0:
        psi6 = -15.0 / (16.0 * math.sqrt(math.pi))
    g2 = (-6.0 * _INV_SQRT_2PI / (psi6 * n)) ** (1.0 / 7.0)
    psi4 = _psi_hat(diffs, n, g2, 4)
    if not psi4 > 0:
        psi4 = 3.0 / (8.0 * math.sqrt(math.pi))
    h = (0.5 / math.sqrt(math.pi) / (psi4 * n)) ** 0.2
    return Bandwidth(h * scale, "plugin")


def bandwidth_silverman(samples) -> Bandwidth:
    """Rule-of-thumb ``0.9 * min(sd, IQR/1.34) * n^(-1/5)``.

    Falls back to whichever of the two spread measures is positive when
    the other one vanishes.
    """
    x = np.asarray(samples, dtype=float).ravel()
    n = x.size
    if n < 2:
        raise ArgumentError(f"silverman bandwidth needs n >= 2, got {n}")
    sd = float(np.std(x, ddof=1))
    q75, q25 = np.percentile(x, [75, 25])
    spread = min(sd, float(q75 - q25) / 1.34)
    if spread <= 0.0:
        spread = sd
    if spread <= 0.0:
        raise DegenerateDataError("all samples are identical")
    return Bandwidth(0.9 * spread * n ** (-0.2), "silverman")
