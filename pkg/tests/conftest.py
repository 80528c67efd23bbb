import contextlib

import numpy as np
import pytest

from lsspa import Dataset

ACCEPTANCE_LINES = []


@pytest.fixture
def rng():
    return np.random.default_rng(20240613)


def random_split(rng, n, p, noise=1.0):
    X = rng.standard_normal((n, p)) @ (np.eye(p) + 0.3 * rng.standard_normal((p, p)))
    theta = rng.standard_normal(p)
    return Dataset(X, X @ theta + noise * rng.standard_normal(n))


def random_problem(rng, n, p, m=None):
    """Train and test splits drawn from the same correlated linear model."""
    mix = np.eye(p) + 0.3 * rng.standard_normal((p, p))
    theta = rng.standard_normal(p)
    splits = []
    for rows in (n, n if m is None else m):
        X = rng.standard_normal((rows, p)) @ mix
        splits.append(Dataset(X, X @ theta + rng.standard_normal(rows)))
    return tuple(splits)


def normal_eq_fit(X, y, cols):
    """Least squares restricted to ``cols`` via the normal equations."""
    theta = np.zeros(X.shape[1])
    if cols:
        Xs = X[:, cols]
        theta[cols] = np.linalg.solve(Xs.T @ Xs, Xs.T @ y)
    return theta


def direct_r2(theta, test):
    """Out-of-sample R^2 against the zero predictor, on raw test data."""
    resid = test.X @ theta - test.y
    return 1.0 - (resid @ resid) / (test.y @ test.y)


def assert_efficient(result, atol=1e-8):
    """Every batch snapshot sums to the full-model R^2."""
    assert result.history
    for rec in result.history:
        assert abs(rec.shapley.sum() - result.r2_full) <= atol
    assert abs(result.shapley.sum() - result.r2_full) <= atol


@contextlib.contextmanager
def criterion(number, title):
    try:
        yield
    except BaseException:
        ACCEPTANCE_LINES.append(f"[FAIL] criterion {number}: {title}")
        raise
    ACCEPTANCE_LINES.append(f"[PASS] criterion {number}: {title}")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
