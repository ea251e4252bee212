"""Maximum-likelihood fitting, information criteria, LR test and case deletion."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import linalg, stats

from .errors import ConvergenceError, ConvergenceWarning, InvalidPair, SingularityError
from .optim import bfgs_minimize
from .regression import Dataset, ModelParams, loglik, observed_information, score
from .special_fns import default_rule

__all__ = [
    "FitOptions",
    "FitResult",
    "LrTestResult",
    "RelativeChangeRow",
    "starting_values",
    "fit",
    "fit_restricted",
    "lr_test",
    "relative_changes",
    "information_criteria",
    "covariance_from_information",
]

ALPHA_FLOOR = 1e-3
LAMBDA_DIVERGED = 50.0
_POLISH_STEPS = 10
CHI2_1_95 = float(stats.chi2.ppf(0.95, 1))


@dataclass(frozen=True)
class FitOptions:
    """Optimizer settings.

    Convergence needs both ``max|score| < gtol`` (original parameterization)
    and a relative log-likelihood change below ``ftol``.  ``lambda_starts``
    lists the skewness values tried as starting points (ignored when
    ``start`` is given or ``lambda_fixed`` is set).
    """

    gtol: float = 1e-6
    ftol: float = 1e-10
    max_iter: int = 500
    quad_order: int | None = None
    lambda_fixed: float | None = None
    strict: bool = False
    start: ModelParams | None = None
    lambda_starts: tuple[float, ...] = (0.0, -1.0, 1.0)


@dataclass(frozen=True)
class FitResult:
    theta_hat: ModelParams
    se: np.ndarray
    loglik_hat: float
    aic: float
    bic: float
    hqic: float
    converged: bool
    iterations: int
    grad_norm_at_solution: float
    n_obs: int
    n_params: int
    covariance: np.ndarray
    lambda_fixed: float | None = None
    message: str = ""
    start: ModelParams | None = field(default=None, repr=False)

    @property
    def theta_vector(self) -> np.ndarray:
        return self.theta_hat.to_vector()

    def to_dict(self) -> dict:
        th = self.theta_hat
        return {
            "beta": th.beta.tolist(),
            "alpha": th.alpha,
            "lambda": th.lam,
            "se": {
                "beta": self.se[:-2].tolist(),
                "alpha": float(self.se[-2]),
                "lambda": None if np.isnan(self.se[-1]) else float(self.se[-1]),
            },
            "loglik": self.loglik_hat,
            "aic": self.aic,
            "bic": self.bic,
            "hqic": self.hqic,
            "converged": self.converged,
            "iterations": self.iterations,
            "grad_norm": self.grad_norm_at_solution,
            "n_obs": self.n_obs,
            "n_params": self.n_params,
            "lambda_fixed": self.lambda_fixed,
        }


@dataclass(frozen=True)
class LrTestResult:
    statistic: float
    df: int = 1
    critical_5pct: float = CHI2_1_95
    reject: bool = False
    p_value: float = 1.0


@dataclass(frozen=True)
class RelativeChangeRow:
    """Relative changes after deleting case ``dropped_index`` (0-based).

    ``rc_j = |(theta_j - theta_j(i)) / ref_j|`` where ``ref`` is the
    post-deletion estimate or the full-data estimate (see
    :func:`relative_changes`).  Components with ``ref_j == 0`` are ``nan``
    and flagged in ``undefined``.
    """

    dropped_index: int
    rc: np.ndarray
    se_after: np.ndarray
    theta_after: np.ndarray
    undefined: np.ndarray
    converged: bool
    error: str | None = None


def information_criteria(loglik_value: float, k: int, n: int) -> tuple[float, float, float]:
    """AIC, BIC and Hannan-Quinn criterion for ``k`` free parameters and ``n`` observations."""
    m2 = -2.0 * loglik_value
    return m2 + 2.0 * k, m2 + k * np.log(n), m2 + 2.0 * k * np.log(np.log(n))


def covariance_from_information(J: np.ndarray) -> np.ndarray:
    try:
        cf = linalg.cho_factor(J, lower=True)
    except linalg.LinAlgError as exc:
        raise SingularityError("observed information is not positive definite") from exc
    cov = linalg.cho_solve(cf, np.eye(J.shape[0]))
    return 0.5 * (cov + cov.T)


def starting_values(data: Dataset) -> ModelParams:
    """OLS for beta, ``alpha^2 = (4/n) sum sinh^2(r_i / 2)`` on the OLS residuals, ``lam = 0``."""
    beta0, *_ = np.linalg.lstsq(data.X, data.y, rcond=None)
    r = data.y - data.X @ beta0
    alpha0 = float(np.sqrt(4.0 / data.n * np.sum(np.sinh(0.5 * r) ** 2)))
    if not alpha0 > ALPHA_FLOOR:
        warnings.warn(
            f"OLS residuals are (near) zero; alpha start clamped to {ALPHA_FLOOR}",
            RuntimeWarning,
            stacklevel=2,
        )
        alpha0 = ALPHA_FLOOR
    return ModelParams(beta0, alpha0, 0.0)


@dataclass
class _Run:
    theta: ModelParams
    loglik: float
    converged: bool
    iterations: int
    message: str
    start: ModelParams


def _newton_polish(data, theta, n_free, options, rule):
    """Newton steps on the analytic observed information in the original parameterization.

    Used when BFGS stalls because the remaining log-likelihood gain is below
    the rounding level of ``l``; the score can still be driven to ``gtol``.
    Returns ``(theta, converged, steps)``.
    """
    p = data.p
    ll = loglik(data, theta, rule)
    last_change = np.inf
    for k in range(_POLISH_STEPS):
        u = score(data, theta, rule)[:n_free]
        if np.max(np.abs(u)) < options.gtol and last_change <= options.ftol * max(1.0, abs(ll)):
            return theta, True, k
        J = observed_information(data, theta, rule)[:n_free, :n_free]
        try:
            step = linalg.cho_solve(linalg.cho_factor(J, lower=True), u)
        except linalg.LinAlgError:
            return theta, False, k
        x = theta.to_vector()
        t = 1.0
        while t > 1e-4:
            cand = x.copy()
            cand[:n_free] += t * step
            if cand[p] > 0:
                th_new = ModelParams.from_vector(cand)
                ll_new = loglik(data, th_new, rule)
                if ll_new >= ll - 1e-12 * max(1.0, abs(ll)):
                    break
            t *= 0.5
        else:
            return theta, False, k
        last_change = abs(ll_new - ll)
        theta, ll = th_new, ll_new
    u = score(data, theta, rule)[:n_free]
    ok = np.max(np.abs(u)) < options.gtol and last_change <= options.ftol * max(1.0, abs(ll))
    return theta, bool(ok), _POLISH_STEPS


def _run(data, start, options, rule, fixed) -> _Run:
    p = data.p
    lam0 = float(fixed) if fixed is not None else start.lam
    n_free = p + 1 if fixed is not None else p + 2

    def unpack(z):
        lam = lam0 if fixed is not None else z[p + 1]
        return ModelParams(z[:p], np.exp(z[p]), lam)

    def objective(z):
        return -loglik(data, unpack(z), rule)

    def gradient(z):
        th = unpack(z)
        u = score(data, th, rule)[:n_free]
        u[p] *= th.alpha
        return -u

    def stop(z, f_new, f_old, g):
        if not np.all(np.isfinite(g)):
            return False
        th = unpack(z)
        gmax = np.max(np.abs(np.r_[g[:p], g[p] / th.alpha, g[p + 1:]]))
        if gmax >= options.gtol:
            return False
        if np.isnan(f_old):
            return True
        return abs(f_new - f_old) <= options.ftol * max(1.0, abs(f_new))

    z0 = np.r_[start.beta, np.log(start.alpha), [] if fixed is not None else [lam0]]
    res = bfgs_minimize(objective, gradient, z0, stop, max_iter=options.max_iter)
    theta = unpack(res.x)
    converged, iterations, message = bool(res.converged), res.iterations, res.message
    if not converged and np.isfinite(res.fun) and abs(theta.lam) <= LAMBDA_DIVERGED:
        theta, converged, steps = _newton_polish(data, theta, n_free, options, rule)
        iterations += steps
        if converged:
            message = f"converged after Newton polish ({res.message})"
    return _Run(theta, loglik(data, theta, rule), converged, iterations, message, start)


def _choose(runs: list[_Run]) -> _Run:
    """Highest log-likelihood among converged runs with finite-looking ``lam``, else the best overall."""
    proper = [r for r in runs if r.converged and abs(r.theta.lam) <= LAMBDA_DIVERGED]
    pool = proper or runs
    finite = [r for r in pool if np.isfinite(r.loglik)] or pool
    return max(finite, key=lambda r: r.loglik if np.isfinite(r.loglik) else -np.inf)


def fit(data: Dataset, options: FitOptions | None = None) -> FitResult:
    """Maximize the log-likelihood by BFGS over ``(beta, log alpha, lam)``.

    Each start in ``options.lambda_starts`` is combined with the OLS/moment
    starting values for ``beta`` and ``alpha``; the converged optimum with the
    highest log-likelihood wins.  Optima with ``|lam| > LAMBDA_DIVERGED``
    are treated as a diverging skewness estimate (the likelihood increasing
    without bound) and only chosen if nothing else converged.

    Standard errors come from the observed information assembled at the
    estimate in the original ``(beta, alpha, lam)`` parameterization.
    """
    options = FitOptions() if options is None else options
    rule = default_rule(options.quad_order)
    p = data.p
    fixed = options.lambda_fixed
    if options.start is not None:
        if options.start.p != p:
            raise ValueError(f"start has {options.start.p} coefficients, data has {p} columns")
        starts = [options.start]
    else:
        base = starting_values(data)
        lams = [0.0] if fixed is not None else list(dict.fromkeys(float(v) for v in options.lambda_starts))
        if not lams:
            raise ValueError("lambda_starts must not be empty")
        starts = [replace(base, lam=v) for v in lams]
    n_free = p + 1 if fixed is not None else p + 2

    best = _choose([_run(data, st, options, rule, fixed) for st in starts])
    theta = best.theta
    grad_norm = float(np.max(np.abs(score(data, theta, rule)[:n_free])))

    J = observed_information(data, theta, rule)[:n_free, :n_free]
    cov_free = covariance_from_information(J)
    cov = np.full((p + 2, p + 2), np.nan)
    cov[:n_free, :n_free] = cov_free
    se = np.sqrt(np.diag(cov))
    ll = best.loglik
    aic, bic, hqic = information_criteria(ll, n_free, data.n)
    out = FitResult(
        theta_hat=theta,
        se=se,
        loglik_hat=ll,
        aic=aic,
        bic=bic,
        hqic=hqic,
        converged=best.converged,
        iterations=best.iterations,
        grad_norm_at_solution=grad_norm,
        n_obs=data.n,
        n_params=n_free,
        covariance=cov,
        lambda_fixed=None if fixed is None else float(fixed),
        message=best.message,
        start=best.start,
    )
    if not out.converged:
        msg = f"fit did not converge ({best.message}); max|score| = {grad_norm:.3g}"
        if options.strict:
            raise ConvergenceError(msg, out)
        warnings.warn(msg, ConvergenceWarning, stacklevel=2)
    return out


def fit_restricted(data: Dataset, options: FitOptions | None = None) -> FitResult:
    """Fit the symmetric log-BS model (``lam = 0``)."""
    options = FitOptions() if options is None else options
    return fit(data, replace(options, lambda_fixed=0.0))


def lr_test(full: FitResult, restricted: FitResult, tol: float = 1e-6) -> LrTestResult:
    """Likelihood-ratio test of ``lam = 0``; rejects only when the statistic strictly exceeds the chi2(1) 95% quantile."""
    diff = full.loglik_hat - restricted.loglik_hat
    if diff < -tol:
        raise InvalidPair(
            f"restricted log-likelihood {restricted.loglik_hat:.6f} exceeds full {full.loglik_hat:.6f}"
        )
    stat = max(0.0, 2.0 * diff)
    return LrTestResult(
        statistic=stat,
        df=1,
        critical_5pct=CHI2_1_95,
        reject=bool(stat > CHI2_1_95),
        p_value=float(stats.chi2.sf(stat, 1)),
    )


def relative_changes(
    data: Dataset,
    baseline: FitResult,
    drop,
    options: FitOptions | None = None,
    warm_start: bool = False,
    denominator: str = "deleted",
) -> list[RelativeChangeRow]:
    """Refit with each case in ``drop`` (0-based) removed and report relative changes.

    By default each refit is cold-started like :func:`fit` (OLS/moment values
    for the reduced data, each of ``options.lambda_starts``) and
    ``rc_j = |(theta_j - theta_j(i)) / theta_j(i)|``, relative to the
    post-deletion estimate.  With ``denominator="full"`` the full-data
    estimate ``theta_j`` is the divisor instead.
    ``warm_start=True`` starts each refit at ``baseline.theta_hat``; note that
    when the reduced likelihood is unbounded in ``lam`` (McCool without case
    #21) a warm start can drift to ``lam -> inf`` instead of the interior
    local maximum.
    """
    if denominator not in ("deleted", "full"):
        raise ValueError("denominator must be 'deleted' or 'full'")
    options = FitOptions() if options is None else options
    drop = [int(i) for i in drop]
    if len(set(drop)) != len(drop):
        raise ValueError("drop indices must be distinct")
    for i in drop:
        if not 0 <= i < data.n:
            raise IndexError(f"case index {i} out of range for n={data.n}")
    if data.n - 1 <= data.p:
        raise ValueError("too few observations to refit after a deletion")
    opts = replace(
        options,
        start=baseline.theta_hat if warm_start else None,
        lambda_fixed=baseline.lambda_fixed,
        strict=False,
    )
    theta0 = baseline.theta_vector
    rows = []
    for i in drop:
        nan = np.full(theta0.size, np.nan)
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", ConvergenceWarning)
                refit = fit(data.drop(i), opts)
        except (ArithmeticError, ValueError) as exc:
            rows.append(RelativeChangeRow(i, nan, nan, nan, np.zeros(theta0.size, bool), False, str(exc)))
            continue
        th = refit.theta_vector
        ref = th if denominator == "deleted" else theta0
        undefined = ref == 0
        with np.errstate(divide="ignore", invalid="ignore"):
            rc = np.where(undefined, np.nan, np.abs((theta0 - th) / ref))
        err = None if refit.converged else f"refit did not converge: {refit.message}"
        rows.append(RelativeChangeRow(i, rc, refit.se, th, undefined, refit.converged, err))
    return rows
