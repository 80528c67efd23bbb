"""Synthetic regression problems: the correlated-factor benchmark and the 3-feature toy."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ._validation import check_positive_int, check_seed
from .exceptions import InvalidInputError
from .reduction import Dataset, center

TOY_COVARIANCE = np.array([
    [1.0, 0.7, -0.4],
    [0.7, 1.0, -0.5],
    [-0.4, -0.5, 1.0],
])
TOY_THETA = np.array([2.1, 1.4, 0.1])
TOY_SIZE = 50


@dataclass(frozen=True)
class SynthSpec:
    p: int
    n_train: int
    n_test: int
    seed: int = 0

    def __post_init__(self):
        p = check_positive_int(self.p, "p")
        check_seed(self.seed)
        if check_positive_int(self.n_train, "n_train") < p or check_positive_int(self.n_test, "n_test") < p:
            raise InvalidInputError("n_train and n_test must be at least p")


def gen_correlation(p: int, rng, n_factors: Optional[int] = None) -> np.ndarray:
    """Correlation matrix of ``F F^T + I`` with Gaussian factor loadings ``F``.

    ``n_factors`` defaults to ``max(1, p // 20)``; pass 0 for the identity.
    """
    p = check_positive_int(p, "p")
    rng = np.random.default_rng(rng)
    k = max(1, p // 20) if n_factors is None else int(n_factors)
    F = rng.standard_normal((p, k))
    cov = F @ F.T + np.eye(p)
    scale = 1.0 / np.sqrt(np.diag(cov))
    C = cov * np.outer(scale, scale)
    np.fill_diagonal(C, 1.0)
    return C


def gen_dataset(spec: SynthSpec, correlation=None):
    """Draw a train/test pair with a sparse true coefficient vector.

    ``floor((p + 1) / 10)`` coefficients are 2 and the rest 0; the label noise
    has variance ``3 p^2 / 2``.  Both splits are centered by the train means.

    Returns
    -------
    train, test : Dataset
    theta : ndarray of shape (p,)
    """
    p = spec.p
    rng = np.random.default_rng(spec.seed)
    C = gen_correlation(p, rng) if correlation is None else np.asarray(correlation, dtype=np.float64)
    if C.shape != (p, p):
        raise InvalidInputError(f"correlation must be {p} x {p}")
    theta = np.zeros(p)
    theta[rng.choice(p, size=(p + 1) // 10, replace=False)] = 2.0
    L = np.linalg.cholesky(C)
    noise_sd = np.sqrt(1.5 * p**2)
    X_trn = rng.standard_normal((spec.n_train, p)) @ L.T
    X_tst = rng.standard_normal((spec.n_test, p)) @ L.T
    y_trn = X_trn @ theta + noise_sd * rng.standard_normal(spec.n_train)
    y_tst = X_tst @ theta + noise_sd * rng.standard_normal(spec.n_test)
    train, test, _ = center(Dataset(X_trn, y_trn), Dataset(X_tst, y_tst))
    return train, test, theta


def gen_toy(seed: int = 0):
    """Uncentered 3-feature problem with 50 train and 50 test rows and unit noise."""
    rng = np.random.default_rng(check_seed(seed))
    L = np.linalg.cholesky(TOY_COVARIANCE)
    splits = []
    for _ in range(2):
        X = rng.standard_normal((TOY_SIZE, 3)) @ L.T
        splits.append(Dataset(X, X @ TOY_THETA + rng.standard_normal(TOY_SIZE)))
    return tuple(splits)
