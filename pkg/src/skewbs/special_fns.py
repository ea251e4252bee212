"""Scalar kernels and the quadrature-defined mean-shift integrals.

Every integral in the model has the form ``int g(w) phi(w) K(lam * w) dw`` with
``K`` either the standard normal cdf or pdf.  They are evaluated with a fixed
rule against the standard normal weight so that the six coefficients returned
by :func:`c_coefficients` are exact derivatives of one another at the level of
the discretization.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import special

from .errors import DomainError

__all__ = [
    "DEFAULT_QUAD_ORDER",
    "QuadratureRule",
    "CCoefficients",
    "uniform_rule",
    "gauss_hermite_rule",
    "default_rule",
    "norm_pdf",
    "norm_cdf",
    "norm_logcdf",
    "mills_ratio_sn",
    "asinh_half",
    "c_coefficients",
]

DEFAULT_QUAD_ORDER = 257
_HALF_WIDTH = 13.0
_LOG_SQRT_2PI = 0.5 * np.log(2.0 * np.pi)
_SQRT_2_OVER_PI = np.sqrt(2.0 / np.pi)


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes and positive weights for integrals against the standard normal density.

    ``sum(weights * f(nodes))`` approximates ``int f(w) phi(w) dw``.
    """

    nodes: np.ndarray
    weights: np.ndarray
    order: int
    kind: str = "uniform"

    def __post_init__(self):
        nodes = np.array(self.nodes, dtype=float)
        weights = np.array(self.weights, dtype=float)
        if nodes.ndim != 1 or nodes.shape != weights.shape or nodes.size != self.order:
            raise DomainError("nodes and weights must be 1-d arrays of length `order`")
        if self.order < 1:
            raise DomainError("quadrature order must be positive")
        if np.any(np.diff(nodes) <= 0):
            raise DomainError("quadrature nodes must be strictly increasing")
        if np.any(weights <= 0):
            raise DomainError("quadrature weights must be positive")
        nodes.flags.writeable = False
        weights.flags.writeable = False
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)

    def integrate(self, values):
        """Weighted sum of ``values`` sampled at the nodes (last axis)."""
        return np.asarray(values) @ self.weights


@lru_cache(maxsize=32)
def uniform_rule(order: int = DEFAULT_QUAD_ORDER, half_width: float = _HALF_WIDTH) -> QuadratureRule:
    """Trapezoidal rule on ``[-half_width, half_width]`` with ``order`` equispaced nodes.

    For integrands analytic in a strip around the real axis and decaying like
    the normal density, the error decays like ``exp(-2 pi d / h)`` where ``d``
    is the strip half-width and ``h`` the node spacing.  The singularities of
    ``asinh(alpha w / 2)`` sit at ``+-2i/alpha``, which is what limits
    Gauss-Hermite rules for large ``alpha``; the uniform rule is insensitive
    to this.
    """
    if order < 3:
        raise DomainError("uniform rule needs at least 3 nodes")
    nodes = np.linspace(-half_width, half_width, order)
    h = nodes[1] - nodes[0]
    weights = h * np.exp(-0.5 * nodes**2 - _LOG_SQRT_2PI)
    return QuadratureRule(nodes, weights, order, "uniform")


@lru_cache(maxsize=32)
def gauss_hermite_rule(order: int = 80) -> QuadratureRule:
    """Gauss-Hermite rule rescaled to the standard normal weight (``w = sqrt(2) t``)."""
    if order < 1:
        raise DomainError("quadrature order must be positive")
    t, w = np.polynomial.hermite.hermgauss(order)
    weights = w / np.sqrt(np.pi)
    if np.any(weights <= 0):
        raise DomainError(f"Gauss-Hermite weights underflow at order {order}")
    return QuadratureRule(np.sqrt(2.0) * t, weights, order, "gauss-hermite")


def default_rule(order: int | None = None) -> QuadratureRule:
    return uniform_rule(DEFAULT_QUAD_ORDER if order is None else int(order))


def norm_pdf(x):
    x = np.asarray(x, dtype=float)
    return np.exp(-0.5 * x * x - _LOG_SQRT_2PI)


def norm_cdf(x):
    # ndtr is built on erfc, so the lower tail keeps full relative accuracy.
    return special.ndtr(x)


def norm_logcdf(x):
    return special.log_ndtr(x)


def mills_ratio_sn(x):
    """Return ``phi(x) / Phi(x)`` without overflow or 0/0.

    Uses ``sqrt(2/pi) / erfcx(-x / sqrt(2))``, which is exact algebra once the
    common ``exp(-x^2/2)`` factor is cancelled.  For ``x < -5`` the value is
    taken in log-space from ``log_ndtr``.
    """
    x = np.asarray(x, dtype=float)
    with np.errstate(over="ignore"):
        direct = _SQRT_2_OVER_PI / special.erfcx(-x / np.sqrt(2.0))
    tail = np.exp(-0.5 * x * x - _LOG_SQRT_2PI - special.log_ndtr(np.minimum(x, -5.0)))
    out = np.where(x < -5.0, tail, direct)
    return out if out.ndim else float(out)


def asinh_half(alpha, w):
    """``asinh(alpha * w / 2)`` evaluated on ``|z|`` and sign-restored (odd in ``w``)."""
    z = 0.5 * np.asarray(alpha, dtype=float) * np.asarray(w, dtype=float)
    a = np.abs(z)
    out = np.sign(z) * np.log1p(a + a * a / (1.0 + np.sqrt(1.0 + a * a)))
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class CCoefficients:
    """Mean-shift constant ``c(alpha, lam)`` and its first and second partials."""

    c: float
    c_alpha: float
    c_lambda: float
    c_alpha_prime: float
    c_lambda_prime: float
    c_alpha_lambda: float


def c_coefficients(alpha: float, lam: float, rule: QuadratureRule | None = None) -> CCoefficients:
    """Evaluate ``c`` and its five partial derivatives with one shared rule.

    ``c = 4 int asinh(alpha w / 2) phi(w) Phi(lam w) dw``.  The lambda
    derivatives bring down ``w phi(lam w)``, so ``c_lambda`` and
    ``c_alpha_lambda`` integrate against ``phi(lam w)``.
    """
    if not alpha > 0 or not np.isfinite(alpha):
        raise DomainError(f"alpha must be positive and finite, got {alpha!r}")
    if not np.isfinite(lam):
        raise DomainError(f"lambda must be finite, got {lam!r}")
    rule = default_rule() if rule is None else rule
    w = rule.nodes
    lw = lam * w
    big_phi = norm_cdf(lw)
    small_phi = norm_pdf(lw)
    ash = asinh_half(alpha, w)
    root = 4.0 + alpha * alpha * w * w
    inv_sqrt = 1.0 / np.sqrt(root)
    w2 = w * w
    w3 = w2 * w

    rows = np.stack([
        ash * big_phi,
        w * inv_sqrt * big_phi,
        w * ash * small_phi,
        w3 * inv_sqrt / root * big_phi,
        w3 * ash * small_phi,
        w2 * inv_sqrt * small_phi,
    ])
    s = 4.0 * rule.integrate(rows)
    return CCoefficients(
        c=float(s[0]),
        c_alpha=float(s[1]),
        c_lambda=float(s[2]),
        c_alpha_prime=float(-alpha * s[3]),
        c_lambda_prime=float(-lam * s[4]),
        c_alpha_lambda=float(s[5]),
    )
