"""BFGS minimization with a strong-Wolfe line search and pluggable stopping rule."""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.optimize import line_search

__all__ = ["BfgsResult", "bfgs_minimize"]


@dataclass
class BfgsResult:
    x: np.ndarray
    fun: float
    grad: np.ndarray
    iterations: int
    converged: bool
    message: str


def _safe(f):
    def wrapped(x):
        with np.errstate(all="ignore"):
            val = float(f(x))
        return val if np.isfinite(val) else np.inf
    return wrapped


def _backtrack(f, x, p, fx, slope, step=1.0, shrink=0.5, c1=1e-4, tries=60):
    for _ in range(tries):
        fn = f(x + step * p)
        if fn <= fx + c1 * step * slope:
            return step, fn
        step *= shrink
    return None, None


def bfgs_minimize(
    fun: Callable[[np.ndarray], float],
    grad: Callable[[np.ndarray], np.ndarray],
    x0,
    stop: Callable[[np.ndarray, float, float, np.ndarray], bool],
    max_iter: int = 500,
    stall_limit: int = 10,
) -> BfgsResult:
    """Minimize ``fun`` by BFGS on the inverse Hessian.

    ``stop(x, f_new, f_old, g)`` decides convergence after every accepted step
    (and once at the start with ``f_old = nan``).  Steps come from scipy's
    strong-Wolfe search (cubic/quadratic interpolation, ``c1=1e-4``,
    ``c2=0.9``); if it fails, Armijo backtracking is tried, and if that also
    fails the curvature model is reset; failing from a fresh model stops.
    The run also stops (unconverged) after ``stall_limit`` consecutive steps
    whose decrease is at the rounding level of ``f``.
    """
    f = _safe(fun)
    x = np.array(x0, dtype=float)
    n = x.size
    fx = f(x)
    if not np.isfinite(fx):
        return BfgsResult(x, fx, np.full(n, np.nan), 0, False, "non-finite objective at start")
    g = np.asarray(grad(x), dtype=float)
    if stop(x, fx, np.nan, g):
        return BfgsResult(x, fx, g, 0, True, "stationary at start")

    eye = np.eye(n)
    H = eye.copy()
    scaled = False
    f_prev2 = fx + 0.5 * np.linalg.norm(g)
    fresh = True
    stalled = 0
    for k in range(1, max_iter + 1):
        p = -H @ g
        slope = float(g @ p)
        if slope >= 0:
            H = eye.copy()
            scaled = False
            p = -g
            slope = -float(g @ g)
        with warnings.catch_warnings():
            # scipy warns on every failed search; failures are handled below
            warnings.simplefilter("ignore")
            step, *_ , f_new, _, _ = line_search(f, grad, x, p, g, fx, f_prev2, c1=1e-4, c2=0.9, maxiter=30)
        if step is None or not np.isfinite(f_new if f_new is not None else np.inf):
            step, f_new = _backtrack(f, x, p, fx, slope)
        if step is None:
            if fresh:
                return BfgsResult(x, fx, g, k - 1, False, "line search failed")
            fresh = True
            H = eye.copy()
            scaled = False
            continue

        fresh = False
        s = step * p
        x_new = x + s
        g_new = np.asarray(grad(x_new), dtype=float)
        yv = g_new - g
        sy = float(s @ yv)
        if sy > 1e-12 * np.linalg.norm(s) * np.linalg.norm(yv):
            if not scaled:
                H = (sy / float(yv @ yv)) * eye
                scaled = True
            rho = 1.0 / sy
            Hy = H @ yv
            H = H - rho * (np.outer(s, Hy) + np.outer(Hy, s)) + (rho * rho * float(yv @ Hy) + rho) * np.outer(s, s)
        f_prev2 = fx
        f_old = fx
        x, fx, g = x_new, f_new, g_new
        if stop(x, fx, f_old, g):
            return BfgsResult(x, fx, g, k, True, "converged")
        stalled = stalled + 1 if f_old - fx <= 8 * np.finfo(float).eps * abs(fx) else 0
        if stalled >= stall_limit:
            return BfgsResult(x, fx, g, k, False, "no progress at rounding level")
    return BfgsResult(x, fx, g, max_iter, False, "maximum iterations reached")
