import warnings

import numpy as np
import pytest

from skewbs import Dataset, ModelParams, fit, fit_restricted
from skewbs.datasets import load_mccool
from skewbs.regression import simulate_response


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long-running Monte Carlo and refit oracles")


@pytest.fixture(scope="session")
def mccool():
    return load_mccool()


@pytest.fixture(scope="session")
def mccool_fit(mccool):
    return fit(mccool)


@pytest.fixture(scope="session")
def mccool_restricted(mccool):
    return fit_restricted(mccool)


def random_design(rng, n, p):
    X = np.empty((n, p))
    X[:, 0] = 1.0
    if p > 1:
        X[:, 1:] = rng.normal(size=(n, p - 1))
    return X


def random_instance(rng, n=None, p=None, at_mle=False, seed=None):
    """Random (dataset, theta) pair; ``theta`` is the truth or, with ``at_mle``, the fitted MLE."""
    n = int(rng.integers(10, 61)) if n is None else n
    p = int(rng.integers(1, 5)) if p is None else p
    X = random_design(rng, n, p)
    theta = ModelParams(rng.normal(scale=1.0, size=p), float(rng.uniform(0.3, 3.0)), float(rng.uniform(-4, 4)))
    y = simulate_response(X, theta, seed=int(rng.integers(2**31)) if seed is None else seed)
    data = Dataset(y, X)
    if at_mle:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            theta = fit(data).theta_hat
    return data, theta


def central_jacobian(f, x, h):
    """Central-difference Jacobian of a vector function, one column per coordinate of ``x``."""
    x = np.asarray(x, dtype=float)
    cols = []
    for k in range(x.size):
        step = h * max(1.0, abs(x[k]))
        e = np.zeros_like(x)
        e[k] = step
        cols.append((np.asarray(f(x + e)) - np.asarray(f(x - e))) / (2 * step))
    return np.column_stack(cols)


def max_rel_err(a, b, floor=1e-3):
    """Entrywise error scaled by ``max(|b|, floor * max|b|)``."""
    a, b = np.asarray(a, float), np.asarray(b, float)
    scale = np.maximum(np.abs(b), floor * np.max(np.abs(b)))
    return float(np.max(np.abs(a - b) / scale))


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
