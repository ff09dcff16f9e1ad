"""Spectral projected gradient (Barzilai-Borwein) maximizer and a 1-D minimizer."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np
from scipy import optimize

from .errors import ArgumentError

_ALPHA_MIN, _ALPHA_MAX = 1e-10, 1e10
_ARMIJO = 1e-4
_STALL_RTOL, _STALL_WINDOW = 1e-12, 5
_NOISE_RTOL = 1e-12


@dataclass(frozen=True)
class OptimOptions:
    max_iter: int = 500
    grad_tol: float = 1e-7
    step_init: float = 1.0
    nonmonotone_window: int = 10
    restarts: int = 2
    seed: int = 0
    perturb_scale: float = 0.1

    def __post_init__(self):
        if self.max_iter < 1 or self.nonmonotone_window < 1:
            raise ArgumentError("max_iter and nonmonotone_window must be positive")
        if not (0 < self.grad_tol < 1):
            raise ArgumentError("grad_tol must lie in (0, 1)")
        if self.step_init <= 0 or self.perturb_scale < 0 or self.restarts < 0:
            raise ArgumentError("invalid optimizer options")


@dataclass
class OptimResult:
    x: np.ndarray
    value: float
    grad_norm: float
    iterations: int
    converged: bool
    restarts_used: int = 0
    message: str = ""


def _noise(f: float) -> float:
    # attainable resolution of a sum-of-logs objective near its optimum
    return _NOISE_RTOL * max(1.0, abs(f))


def _spg(value_and_grad, x0, opts: OptimOptions) -> OptimResult:
    """Single nonmonotone spectral-gradient run (maximization)."""
    x = np.array(x0, dtype=float)
    f, g = value_and_grad(x)
    if not np.isfinite(f):
        raise ArgumentError("objective is not finite at the starting point")
    g = np.asarray(g, dtype=float)

    def gmax(v):
        return float(np.max(np.abs(v))) if v.size else 0.0

    gnorm = gmax(g)
    best_x, best_f, best_g, best_gn = x.copy(), f, g.copy(), gnorm
    history = deque([f], maxlen=opts.nonmonotone_window)
    trace = deque([(f, gnorm)], maxlen=_STALL_WINDOW + 1)
    alpha = opts.step_init / max(1.0, gnorm)
    message = "max_iter"
    it = 0
    for it in range(1, opts.max_iter + 1):
        if gnorm <= opts.grad_tol:
            message = "gradient"
            it -= 1
            break
        d = alpha * g
        slope = float(g @ d)
        f_ref = max(history)
        lam = 1.0
        while True:
            x_new = x + lam * d
            f_new, g_new = value_and_grad(x_new)
            if np.isfinite(f_new):
                if f_new >= f_ref + _ARMIJO * lam * slope:
                    break
                # below round-off the objective cannot rank points; the gradient still can
                if abs(f_new - f) <= _noise(f) and gmax(np.asarray(g_new)) < gnorm:
                    break
                denom = f_new - f - lam * slope
                trial = 0.5 * lam * lam * slope / -denom if denom < 0 else 0.5 * lam
            else:
                trial = 0.1 * lam
            lam = min(max(trial, 0.1 * lam), 0.5 * lam)
            if lam * np.max(np.abs(d)) < 1e-16 * (1.0 + np.max(np.abs(x))):
                x_new = None
                break
        if x_new is None:
            message = "line search"
            break
        g_new = np.asarray(g_new, dtype=float)
        s, y = x_new - x, g_new - g
        # ascent on f is descent on -f, whose gradient difference is -y
        sy = -float(s @ y)
        alpha = _ALPHA_MAX if sy <= 0 else min(_ALPHA_MAX, max(_ALPHA_MIN, float(s @ s) / sy))
        x, f, g = x_new, f_new, g_new
        gnorm = gmax(g)
        history.append(f)
        if f > best_f + _noise(best_f) or (f >= best_f - _noise(best_f) and gnorm < best_gn):
            best_x, best_f, best_g, best_gn = x.copy(), f, g.copy(), gnorm
        trace.append((best_f, best_gn))
        if len(trace) > _STALL_WINDOW:
            (f0, g0), (f1, g1) = trace[0], trace[-1]
            if f1 - f0 <= _STALL_RTOL * max(1.0, abs(f1)) and g1 >= 0.5 * g0:
                message = "stall"
                break
    return OptimResult(best_x, float(best_f), best_gn, it, best_gn <= opts.grad_tol, 0, message)


def bb_maximize(objective: Callable, gradient: Callable | None, x0,
                opts: OptimOptions = OptimOptions(), value_and_grad: Callable | None = None,
                ) -> OptimResult:
    """Maximize a smooth function with nonmonotone Barzilai-Borwein steps.

    Parameters
    ----------
    objective, gradient : callable
        ``f(x) -> float`` and ``grad f(x) -> ndarray``.
    x0 : array_like
        Starting point.
    opts : OptimOptions
        Iteration budget, tolerances, restart settings.
    value_and_grad : callable, optional
        ``x -> (f, grad)`` evaluated jointly; used instead of the two
        callables above when given.

    Returns
    -------
    OptimResult
        Best iterate over the main run and all perturbation restarts.
        ``converged`` is true iff the max-norm of the gradient at ``x`` is
        at most ``opts.grad_tol``.
    """
    if value_and_grad is None:
        if gradient is None:
            raise ArgumentError("a gradient is required")

        def value_and_grad(x):
            return objective(x), gradient(x)

    best = _spg(value_and_grad, x0, opts)
    total_iter = best.iterations
    rng = np.random.default_rng(opts.seed)
    used = 0
    for _ in range(opts.restarts):
        start = best.x + opts.perturb_scale * (1.0 + np.abs(best.x)) * rng.standard_normal(best.x.size)
        used += 1
        try:
            res = _spg(value_and_grad, start, opts)
        except ArgumentError:
            continue
        total_iter += res.iterations
        tie = _noise(best.value)
        if res.value > best.value + tie or \
                (res.value >= best.value - tie and res.grad_norm < best.grad_norm):
            best = res
    return replace(best, iterations=total_iter, restarts_used=used)


def scalar_minimize(f: Callable[[float], float], bracket: tuple[float, float],
                    tol: float = 1e-8) -> float:
    """Minimize ``f`` on ``[lo, hi]`` by Brent's golden-section/parabolic method."""
    lo, hi = (float(b) for b in bracket)
    if not (np.isfinite(lo) and np.isfinite(hi) and lo < hi):
        raise ArgumentError(f"invalid bracket {bracket!r}")
    if not tol > 0:
        raise ArgumentError("tol must be positive")
    res = optimize.minimize_scalar(f, bounds=(lo, hi), method="bounded",
                                   options={"xatol": tol, "maxiter": 500})
    x = float(res.x)
    # the bounded method never evaluates the endpoints themselves
    for edge in (lo, hi):
        if f(edge) < f(x):
            x = edge
    return x
