"""Log-likelihood, score and observed information of the skewed log-BS regression.

The model is ``y_i = x_i' beta + eps_i`` with ``eps_i ~ SSN(alpha, -c(alpha, lam), 2, lam)``,
so that ``E(y_i) = x_i' beta``.  Everything is written in terms of

    u_i   = (y_i - x_i' beta + c(alpha, lam)) / 2
    xi_i1 = (2 / alpha) cosh(u_i),   xi_i2 = (2 / alpha) sinh(u_i)
    m_i   = phi(lam xi_i2) / Phi(lam xi_i2)

and the per-observation log-likelihood
``l_i = -log(2 pi)/2 + log(xi_i1) - xi_i2^2/2 + log Phi(lam xi_i2)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from types import SimpleNamespace

import numpy as np

from .errors import DomainError, RankError
from .special_fns import (
    CCoefficients,
    QuadratureRule,
    c_coefficients,
    mills_ratio_sn,
    norm_logcdf,
)
from .ssn_dist import SsnParams, log_cosh, ssn_sample

__all__ = [
    "Dataset",
    "ModelParams",
    "XiPair",
    "InfoBlocks",
    "xi",
    "loglik",
    "loglik_contributions",
    "score",
    "score_contributions",
    "score_factor",
    "info_blocks",
    "observed_information",
    "simulate_response",
]

_LOG_SQRT_2PI = 0.5 * np.log(2.0 * np.pi)


@dataclass(frozen=True)
class Dataset:
    """Response vector ``y`` (log-lifetimes) and full-rank design matrix ``X``.

    ``weights`` are optional case weights multiplying each log-likelihood
    contribution; ``None`` means all ones.
    """

    y: np.ndarray
    X: np.ndarray
    weights: np.ndarray | None = None

    def __post_init__(self):
        y = np.array(self.y, dtype=float).reshape(-1)
        X = np.array(self.X, dtype=float)
        if X.ndim == 1:
            X = X[:, None]
        if X.ndim != 2 or X.shape[0] != y.size:
            raise DomainError(f"X must be n x p with n = len(y) = {y.size}, got shape {X.shape}")
        n, p = X.shape
        if p < 1 or n <= p:
            raise DomainError(f"need n > p >= 1, got n={n}, p={p}")
        if not (np.all(np.isfinite(y)) and np.all(np.isfinite(X))):
            raise DomainError("y and X must be finite")
        sv = np.linalg.svd(X, compute_uv=False)
        if sv[-1] <= 1e-10 * sv[0]:
            raise RankError(f"design matrix is rank deficient (singular values {sv})")
        w = None
        if self.weights is not None:
            w = np.array(self.weights, dtype=float).reshape(-1)
            if w.size != n or not np.all(np.isfinite(w)):
                raise DomainError("weights must be a finite vector of length n")
            w.flags.writeable = False
        y.flags.writeable = False
        X.flags.writeable = False
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "weights", w)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]

    def drop(self, index: int) -> "Dataset":
        keep = np.arange(self.n) != index
        w = None if self.weights is None else self.weights[keep]
        return Dataset(self.y[keep], self.X[keep], w)

    def replace(self, y=None, X=None, weights=None) -> "Dataset":
        return Dataset(
            self.y if y is None else y,
            self.X if X is None else X,
            self.weights if weights is None else weights,
        )


@dataclass(frozen=True)
class ModelParams:
    """Parameter vector ``theta = (beta, alpha, lam)``."""

    beta: np.ndarray
    alpha: float
    lam: float = 0.0

    def __post_init__(self):
        beta = np.array(self.beta, dtype=float).reshape(-1)
        if not np.all(np.isfinite(beta)) or not np.isfinite(self.lam):
            raise DomainError("beta and lam must be finite")
        if not (np.isfinite(self.alpha) and self.alpha > 0):
            raise DomainError(f"alpha must be positive and finite, got {self.alpha!r}")
        beta.flags.writeable = False
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "lam", float(self.lam))

    @property
    def p(self) -> int:
        return self.beta.size

    def to_vector(self) -> np.ndarray:
        return np.concatenate([self.beta, [self.alpha, self.lam]])

    @classmethod
    def from_vector(cls, theta) -> "ModelParams":
        theta = np.asarray(theta, dtype=float)
        return cls(theta[:-2], theta[-2], theta[-1])


@dataclass(frozen=True)
class XiPair:
    xi1: np.ndarray
    xi2: np.ndarray


@dataclass(frozen=True)
class InfoBlocks:
    """Per-observation pieces of the observed information.

    ``-d2l/dbeta dbeta' = X' diag(v) X``, ``-d2l/dbeta dalpha = X' h``,
    ``-d2l/dbeta dlam = X' b``, and ``k1, k2, k3`` are the per-observation
    second derivatives in ``(alpha, alpha)``, ``(alpha, lam)``, ``(lam, lam)``.
    """

    v: np.ndarray
    h: np.ndarray
    b: np.ndarray
    k1: np.ndarray
    k2: np.ndarray
    k3: np.ndarray


def _check(data: Dataset, theta: ModelParams):
    if theta.p != data.p:
        raise DomainError(f"beta has length {theta.p} but X has {data.p} columns")


def _weights(data: Dataset):
    return np.ones(data.n) if data.weights is None else data.weights


def _core(data: Dataset, theta: ModelParams, rule, coefs: CCoefficients | None = None):
    _check(data, theta)
    cc = c_coefficients(theta.alpha, theta.lam, rule) if coefs is None else coefs
    u = 0.5 * (data.y - data.X @ theta.beta + cc.c)
    a = theta.alpha
    with np.errstate(over="ignore"):
        xi1 = (2.0 / a) * np.cosh(u)
        xi2 = (2.0 / a) * np.sinh(u)
    return cc, u, xi1, xi2


def _first_order(data, theta, rule):
    cc, u, xi1, xi2 = _core(data, theta, rule)
    lam = theta.lam
    m = mills_ratio_sn(lam * xi2)
    # g = dl_i/du, the derivative through the shared argument u_i
    g = np.tanh(u) - xi1 * xi2 + lam * m * xi1
    return SimpleNamespace(cc=cc, u=u, xi1=xi1, xi2=xi2, m=m, g=g)


def xi(data: Dataset, theta: ModelParams, rule: QuadratureRule | None = None) -> XiPair:
    _, _, xi1, xi2 = _core(data, theta, rule)
    return XiPair(xi1, xi2)


def loglik_contributions(data: Dataset, theta: ModelParams, rule: QuadratureRule | None = None) -> np.ndarray:
    """Unweighted per-observation log-likelihood ``l_i(theta)``."""
    _, u, _, xi2 = _core(data, theta, rule)
    with np.errstate(over="ignore", invalid="ignore"):
        return (
            -_LOG_SQRT_2PI
            + np.log(2.0 / theta.alpha)
            + log_cosh(u)
            - 0.5 * xi2 * xi2
            + (norm_logcdf(theta.lam * xi2) if theta.lam != 0 else -np.log(2.0))
        )


def loglik(data: Dataset, theta: ModelParams, rule: QuadratureRule | None = None) -> float:
    li = loglik_contributions(data, theta, rule)
    return float(np.sum(_weights(data) * li))


def score_contributions(data: Dataset, theta: ModelParams, rule: QuadratureRule | None = None) -> np.ndarray:
    """``n x (p+2)`` matrix whose row ``i`` is the gradient of ``l_i`` in ``theta``.

    Columns are ``x_i s_i``, ``a_i`` and ``c_i`` with
    ``s_i = {xi1 xi2 - xi2/xi1 - lam xi1 m}/2``.
    """
    f = _first_order(data, theta, rule)
    a, lam, cc = theta.alpha, theta.lam, f.cc
    s = -0.5 * f.g
    d_alpha = (-1.0 + f.xi2**2 - lam * f.m * f.xi2) / a + 0.5 * cc.c_alpha * f.g
    d_lam = f.m * f.xi2 + 0.5 * cc.c_lambda * f.g
    return np.column_stack([data.X * s[:, None], d_alpha, d_lam])


def score_factor(data: Dataset, theta: ModelParams, rule: QuadratureRule | None = None) -> np.ndarray:
    """Per-observation ``s_i`` such that the beta-score contribution is ``x_i s_i``."""
    return -0.5 * _first_order(data, theta, rule).g


def score(data: Dataset, theta: ModelParams, rule: QuadratureRule | None = None) -> np.ndarray:
    """Score vector ``(U_beta, U_alpha, U_lam)``."""
    return _weights(data) @ score_contributions(data, theta, rule)


def info_blocks(data: Dataset, theta: ModelParams, rule: QuadratureRule | None = None) -> InfoBlocks:
    f = _first_order(data, theta, rule)
    a, lam, cc = theta.alpha, theta.lam, f.cc
    xi1, xi2, m, g = f.xi1, f.xi2, f.m, f.g
    t = np.tanh(f.u)
    lx = lam * xi2
    q = m * (lx + m)  # -d m(z)/dz at z = lam xi2

    base = 2.0 * xi2**2 + 4.0 / a**2 - 1.0 + t * t
    v = 0.25 * (base - lam * xi2 * m + lam**2 * xi1**2 * q)
    e = xi1 * (m - lx * q)  # d2 l_i / du dlam at fixed u
    g_u = -4.0 * v
    g_a = 2.0 * xi1 * xi2 / a - lam * e / a  # d2 l_i / du dalpha at fixed u

    h = xi1 * xi2 / a - cc.c_alpha * v - lam * e / (2.0 * a)
    b = -cc.c_lambda * v + 0.5 * e

    # Chain rule through u(alpha, lam) = (... + c(alpha, lam)) / 2.
    ua, ul = 0.5 * cc.c_alpha, 0.5 * cc.c_lambda
    uaa, ull, ual = 0.5 * cc.c_alpha_prime, 0.5 * cc.c_lambda_prime, 0.5 * cc.c_alpha_lambda
    f_aa = (1.0 - 3.0 * xi2**2 + 2.0 * lam * m * xi2 - lam**2 * q * xi2**2) / a**2
    f_al = -(xi2 / a) * (m - lx * q)
    f_ll = -(xi2**2) * q
    k1 = f_aa + 2.0 * ua * g_a + ua * ua * g_u + uaa * g
    k2 = f_al + ua * e + ul * g_a + ua * ul * g_u + ual * g
    k3 = f_ll + 2.0 * ul * e + ul * ul * g_u + ull * g
    return InfoBlocks(v, h, b, k1, k2, k3)


def observed_information(data: Dataset, theta: ModelParams, rule: QuadratureRule | None = None) -> np.ndarray:
    """Negative Hessian of the log-likelihood, ``(p+2) x (p+2)``, symmetric by construction."""
    ib = info_blocks(data, theta, rule)
    w = _weights(data)
    X = data.X
    p = data.p
    J = np.empty((p + 2, p + 2))
    J[:p, :p] = X.T @ (X * (w * ib.v)[:, None])
    J[:p, p] = X.T @ (w * ib.h)
    J[:p, p + 1] = X.T @ (w * ib.b)
    J[p, p] = -np.sum(w * ib.k1)
    J[p, p + 1] = -np.sum(w * ib.k2)
    J[p + 1, p + 1] = -np.sum(w * ib.k3)
    iu = np.triu_indices(p + 2, 1)
    J[(iu[1], iu[0])] = J[iu]
    return J


def simulate_response(
    X: np.ndarray, theta: ModelParams, seed=None, rule: QuadratureRule | None = None
) -> np.ndarray:
    """Draw ``y = X beta + eps`` with ``eps ~ SSN(alpha, -c(alpha, lam), lam)`` (mean zero)."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] != theta.p:
        raise DomainError(f"beta has length {theta.p} but X has {X.shape[1]} columns")
    c = c_coefficients(theta.alpha, theta.lam, rule).c
    eps = ssn_sample(SsnParams(theta.alpha, -c, theta.lam), X.shape[0], seed=seed)
    return X @ theta.beta + eps
