"""Local influence and generalized leverage for the skewed log-BS regression.

Local influence follows Cook's normal-curvature approach: for a perturbation
vector ``omega`` with null value ``omega0``,

    Delta = d2 l(theta | omega) / dtheta domega'   at (theta_hat, omega0)
    B     = Delta' J^{-1} Delta,   J = observed information

and the curvature in unit direction ``d`` is ``C_d = 2 |d' B d|``.  The
direction of maximal curvature ``d_max`` is the top eigenvector of ``B``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy import linalg

from .errors import (
    ConstantColumnError,
    DomainError,
    EigenFailure,
    SingularityError,
    StationarityWarning,
)
from .regression import (
    Dataset,
    ModelParams,
    info_blocks,
    observed_information,
    score,
    score_contributions,
    score_factor,
)
from .special_fns import QuadratureRule

__all__ = [
    "Scheme",
    "DeltaMatrix",
    "InfluenceReport",
    "LeverageMatrix",
    "STATIONARITY_TOL",
    "parameter_indices",
    "delta_case_weights",
    "delta_response",
    "delta_covariate",
    "delta_matrix",
    "perturb",
    "curvature_matrix",
    "curvature",
    "curvature_dmax",
    "curvature_dmax_subset",
    "generalized_leverage",
    "local_influence",
]

STATIONARITY_TOL = 1e-3


class Scheme(str, Enum):
    CASE_WEIGHTS = "case"
    RESPONSE = "response"
    COVARIATE = "covariate"


@dataclass(frozen=True)
class DeltaMatrix:
    """``(p+2) x n`` matrix of mixed derivatives; ``column`` is the perturbed covariate (0-based)."""

    values: np.ndarray
    scheme: Scheme
    scale_factor: float = 1.0
    column: int | None = None


@dataclass(frozen=True)
class InfluenceReport:
    d_max_abs: np.ndarray
    c_dmax: float
    scheme: Scheme | None
    subset: tuple[int, ...] | None
    d_max: np.ndarray
    eigenvalue: float
    b_matrix: np.ndarray | None = None

    def ranking(self) -> np.ndarray:
        """0-based case indices ordered by decreasing ``|d_max|``."""
        return np.argsort(-self.d_max_abs, kind="stable")


@dataclass(frozen=True)
class LeverageMatrix:
    """``values[i, l] = d yhat_i / d y_l`` at the estimate."""

    values: np.ndarray

    @property
    def diagonal(self) -> np.ndarray:
        return np.diag(self.values).copy()


def parameter_indices(p: int, names) -> tuple[int, ...]:
    """Map names (``beta``, ``beta1``..``betap``, ``alpha``, ``lambda``) or ints to positions in ``theta``."""
    if isinstance(names, (str, int, np.integer)):
        names = [names]
    out: list[int] = []
    for name in names:
        if isinstance(name, (int, np.integer)):
            idx = [int(name)]
        elif name == "beta":
            idx = list(range(p))
        elif name == "alpha":
            idx = [p]
        elif name in ("lambda", "lam"):
            idx = [p + 1]
        elif name.startswith("beta") and name[4:].isdigit() and 1 <= int(name[4:]) <= p:
            idx = [int(name[4:]) - 1]
        else:
            raise DomainError(f"unknown parameter name {name!r}")
        for i in idx:
            if not 0 <= i < p + 2:
                raise DomainError(f"parameter index {i} out of range")
            if i not in out:
                out.append(i)
    if not out:
        raise DomainError("parameter subset is empty")
    return tuple(sorted(out))


def _check_stationary(data, theta, rule):
    g = score(data, theta, rule)
    gmax = float(np.max(np.abs(g)))
    if gmax > STATIONARITY_TOL:
        warnings.warn(
            f"max|score| = {gmax:.3g} at the supplied estimate; influence formulas assume a stationary point",
            StationarityWarning,
            stacklevel=3,
        )


def _case_weights(data):
    return np.ones(data.n) if data.weights is None else data.weights


def delta_case_weights(data: Dataset, theta_hat: ModelParams, rule: QuadratureRule | None = None) -> DeltaMatrix:
    """Case-weight perturbation ``l(theta|omega) = sum omega_i l_i``, ``omega0 = 1``.

    Column ``i`` is the gradient of ``l_i``: ``(x_i s_i, a_i, c_i)``.
    """
    _check_stationary(data, theta_hat, rule)
    D = score_contributions(data, theta_hat, rule).T * _case_weights(data)
    return DeltaMatrix(D, Scheme.CASE_WEIGHTS, 1.0)


def _response_blocks(data, theta_hat, rule):
    ib = info_blocks(data, theta_hat, rule)
    w = _case_weights(data)
    return np.vstack([data.X.T * (w * ib.v), w * ib.h, w * ib.b])


def delta_response(
    data: Dataset,
    theta_hat: ModelParams,
    scale: float | None = None,
    rule: QuadratureRule | None = None,
) -> DeltaMatrix:
    """Additive response perturbation ``y_i + omega_i s_y``, ``omega0 = 0``.

    ``Delta = s_y [X'V; h'; b']``; ``s_y`` defaults to the sample standard
    deviation of ``y`` (divisor ``n - 1``).
    """
    _check_stationary(data, theta_hat, rule)
    s_y = float(np.std(data.y, ddof=1)) if scale is None else float(scale)
    return DeltaMatrix(s_y * _response_blocks(data, theta_hat, rule), Scheme.RESPONSE, s_y)


def delta_covariate(
    data: Dataset,
    theta_hat: ModelParams,
    j: int,
    scale: float | None = None,
    rule: QuadratureRule | None = None,
) -> DeltaMatrix:
    """Additive perturbation ``x_ij + omega_i s_x`` of design column ``j`` (0-based).

    ``Delta_beta = -s_x beta_j X'V + s_x e_j s'``, ``Delta_alpha = -s_x beta_j h'``,
    ``Delta_lam = -s_x beta_j b'``.
    """
    if not 0 <= j < data.p:
        raise DomainError(f"column index {j} out of range for p={data.p}")
    col = data.X[:, j]
    if np.ptp(col) == 0:
        raise ConstantColumnError(f"design column {j} is constant; covariate perturbation is undefined")
    _check_stationary(data, theta_hat, rule)
    s_x = float(np.std(col, ddof=1)) if scale is None else float(scale)
    D = -s_x * theta_hat.beta[j] * _response_blocks(data, theta_hat, rule)
    D[j] += s_x * score_factor(data, theta_hat, rule) * _case_weights(data)
    return DeltaMatrix(D, Scheme.COVARIATE, s_x, j)


def delta_matrix(data, theta_hat, scheme, column=None, scale=None, rule=None) -> DeltaMatrix:
    scheme = Scheme(scheme)
    if scheme is Scheme.CASE_WEIGHTS:
        return delta_case_weights(data, theta_hat, rule)
    if scheme is Scheme.RESPONSE:
        return delta_response(data, theta_hat, scale, rule)
    if column is None:
        raise DomainError("covariate scheme needs a column index")
    return delta_covariate(data, theta_hat, column, scale, rule)


def perturb(data: Dataset, scheme, omega, scale: float = 1.0, column: int | None = None) -> Dataset:
    """Dataset under perturbation ``omega`` (case weights multiply, response/covariate shift)."""
    scheme = Scheme(scheme)
    omega = np.asarray(omega, dtype=float)
    if scheme is Scheme.CASE_WEIGHTS:
        return data.replace(weights=_case_weights(data) * omega)
    if scheme is Scheme.RESPONSE:
        return data.replace(y=data.y + scale * omega)
    X = data.X.copy()
    X[:, column] += scale * omega
    return data.replace(X=X)


def _factor(info):
    try:
        return linalg.cho_factor(np.asarray(info, dtype=float), lower=True)
    except linalg.LinAlgError as exc:
        raise SingularityError("observed information is not positive definite") from exc


def curvature_matrix(delta: DeltaMatrix, info: np.ndarray, subset=None) -> np.ndarray:
    """``B = Delta' J^{-1} Delta`` or, for a parameter subset ``theta1``,
    ``B1 = Delta' (J^{-1} - [[0, 0], [0, J22^{-1}]]) Delta`` where ``J22`` is the
    block of the complementary parameters.  Built from Cholesky solves.
    """
    D = delta.values
    B = D.T @ linalg.cho_solve(_factor(info), D)
    if subset is not None:
        k = D.shape[0]
        rest = [i for i in range(k) if i not in set(subset)]
        if rest:
            J22 = np.asarray(info)[np.ix_(rest, rest)]
            D2 = D[rest]
            B = B - D2.T @ linalg.cho_solve(_factor(J22), D2)
    return 0.5 * (B + B.T)


def curvature(delta: DeltaMatrix, info: np.ndarray, d, subset=None) -> float:
    d = np.asarray(d, dtype=float)
    if abs(np.linalg.norm(d) - 1.0) > 1e-8:
        raise DomainError("direction must have unit Euclidean norm")
    B = curvature_matrix(delta, info, subset)
    return float(2.0 * abs(d @ B @ d))


def _top_eigenpair(B):
    try:
        vals, vecs = linalg.eigh(B, driver="ev")
    except linalg.LinAlgError as exc:
        raise EigenFailure(str(exc)) from exc
    k = int(np.argmax(np.abs(vals)))
    vec = vecs[:, k]
    vec = vec / np.linalg.norm(vec)
    if vec[np.argmax(np.abs(vec))] < 0:
        vec = -vec
    return float(vals[k]), vec


def curvature_dmax(delta: DeltaMatrix, info: np.ndarray) -> InfluenceReport:
    B = curvature_matrix(delta, info)
    mu, vec = _top_eigenpair(B)
    return InfluenceReport(np.abs(vec), 2.0 * abs(mu), delta.scheme, None, vec, mu, B)


def curvature_dmax_subset(delta: DeltaMatrix, info: np.ndarray, subset) -> InfluenceReport:
    subset = tuple(sorted(set(int(i) for i in subset)))
    if not subset:
        raise DomainError("parameter subset is empty")
    B = curvature_matrix(delta, info, subset)
    mu, vec = _top_eigenpair(B)
    return InfluenceReport(np.abs(vec), 2.0 * abs(mu), delta.scheme, subset, vec, mu, B)


def generalized_leverage(
    data: Dataset, theta_hat: ModelParams, rule: QuadratureRule | None = None
) -> LeverageMatrix:
    """``GL = D_theta J^{-1} L_theta_y`` with ``D_theta = [X 0 0]``.

    ``L_theta_y = d2 l / dtheta dy'`` has columns ``(x_l v_l, h_l, b_l)``.
    """
    _check_stationary(data, theta_hat, rule)
    J = observed_information(data, theta_hat, rule)
    Lty = _response_blocks(data, theta_hat, rule)
    sol = linalg.cho_solve(_factor(J), Lty)
    return LeverageMatrix(data.X @ sol[: data.p])


def local_influence(
    data: Dataset,
    theta_hat: ModelParams,
    scheme,
    column: int | None = None,
    subset=None,
    scale: float | None = None,
    rule: QuadratureRule | None = None,
) -> InfluenceReport:
    """Delta, observed information and the ``d_max`` report in one call."""
    delta = delta_matrix(data, theta_hat, scheme, column, scale, rule)
    J = observed_information(data, theta_hat, rule)
    if subset is None:
        return curvature_dmax(delta, J)
    return curvature_dmax_subset(delta, J, parameter_indices(data.p, subset))
