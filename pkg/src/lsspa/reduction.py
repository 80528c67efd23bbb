"""Compression of train/test data to a square triangular least-squares system.

For a tall matrix ``X`` with thin QR factorization ``X = QR``,

    ||X theta - y||^2 = ||R theta - Q^T y||^2 + ||y - Q Q^T y||^2

so every least-squares fit and every squared-error evaluation on ``(X, y)``
can be done on the p x p triangular ``R`` plus a scalar constant.  Both the
QR path and the out-of-core Gram/Cholesky path produce a :class:`ReducedData`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator

import numpy as np
from scipy.linalg import solve_triangular

from ._validation import as_xy, check_positive_int, check_positive_real
from .exceptions import ConditioningError, InvalidInputError, RankDeficientError

#: Relative threshold on the diagonal of R below which X is declared rank deficient.
RANK_TOL = 1e-10
#: Relative pivot threshold on the Cholesky path.  The Gram matrix squares the
#: condition number, so a looser bound than ``RANK_TOL`` is needed there.
CHOLESKY_PIVOT_TOL = 1e-7
DEFAULT_BLOCK_SIZE = 65536


@dataclass(frozen=True)
class Dataset:
    """Feature matrix ``X`` (n_rows x p) and label vector ``y`` for one split."""

    X: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        X, y = as_xy(self.X, self.y)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    @property
    def n_rows(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]


@dataclass(frozen=True)
class CenteringInfo:
    """Train-split means, kept so the intercept can be recovered after fitting."""

    feature_means: np.ndarray
    label_mean: float

    def intercept(self, theta) -> float:
        """Intercept of the uncentered model, ``ybar - xbar @ theta``."""
        return float(self.label_mean - self.feature_means @ np.asarray(theta))

    def apply(self, data: "Dataset") -> "Dataset":
        return Dataset(data.X - self.feature_means, data.y - self.label_mean)


@dataclass(frozen=True)
class ReducedData:
    """Square triangular surrogate of one data split.

    Attributes
    ----------
    R : ndarray of shape (p, p)
        Upper triangular factor with nonnegative diagonal.
    y_proj : ndarray of shape (p,)
        Projected labels ``Q^T y``.
    residual_sq : float
        ``||y - Q Q^T y||^2``, the part of ``y`` no model can explain.
    label_sq_norm : float
        ``||y||^2``.
    """

    R: np.ndarray
    y_proj: np.ndarray
    residual_sq: float
    label_sq_norm: float

    @property
    def p(self) -> int:
        return self.R.shape[0]

    def sq_error(self, theta) -> np.ndarray:
        """``||X theta - y||^2`` for one parameter vector or a (p, k) stack."""
        theta = np.asarray(theta, dtype=np.float64)
        resid = self.R @ theta - (self.y_proj if theta.ndim == 1 else self.y_proj[:, None])
        return np.sum(resid**2, axis=0) + self.residual_sq

    def solve(self) -> np.ndarray:
        """Full-model least-squares parameters."""
        return solve_triangular(self.R, self.y_proj, lower=False)


def center(train: Dataset, test: Dataset):
    """Subtract the train column means from both splits.

    The test split is shifted by the *train* means, so the fitted intercept
    ``ybar - xbar @ theta`` is the one applied at prediction time.

    Returns
    -------
    train_c, test_c : Dataset
    info : CenteringInfo
    """
    if train.p != test.p:
        raise InvalidInputError(
            f"train has {train.p} features but test has {test.p}"
        )
    info = CenteringInfo(train.X.mean(axis=0), float(train.y.mean()))
    return info.apply(train), info.apply(test), info


def _normalize_signs(R, y_proj):
    signs = np.sign(np.diag(R))
    signs[signs == 0] = 1.0
    return R * signs[:, None], y_proj * signs


def _check_rank(R, tol, error_cls):
    diag = np.abs(np.diag(R))
    scale = diag.max() if diag.size else 0.0
    bad = np.flatnonzero(diag < tol * scale) if scale > 0 else np.arange(diag.size)
    if bad.size:
        col = int(bad[0])
        if error_cls is RankDeficientError:
            raise RankDeficientError(col)
        raise error_cls(
            f"Cholesky factorization of the Gram matrix is numerically singular "
            f"at column {col}; use the QR reduction instead, which is more stable"
        )


def qr_reduce(data: Dataset, check_rank: bool = True) -> ReducedData:
    """Reduce a data split with a Householder QR factorization.

    ``[X y]`` is factored in one pass so that ``Q`` is never formed: the
    leading p x p block is ``R``, the top of the last column is ``Q^T y`` and
    the entry below it is the residual norm.  ``check_rank=False`` skips the
    rank test, which only matters for splits that will be fitted on.
    """
    N, p = data.X.shape
    if N < p:
        raise InvalidInputError(f"need at least as many rows as features, got {N} < {p}")
    aug = np.linalg.qr(np.column_stack([data.X, data.y]), mode="r")
    R = np.triu(aug[:p, :p])
    y_proj = aug[:p, p].copy()
    residual_sq = float(aug[p, p] ** 2) if N > p else 0.0
    if check_rank:
        _check_rank(R, RANK_TOL, RankDeficientError)
    R, y_proj = _normalize_signs(R, y_proj)
    return ReducedData(R, y_proj, residual_sq, float(data.y @ data.y))


def iter_row_blocks(data: Dataset, block_size: int = DEFAULT_BLOCK_SIZE) -> Iterator:
    """Yield ``(X_block, y_block)`` row slices of ``data``."""
    block_size = check_positive_int(block_size, "block_size")
    for start in range(0, data.n_rows, block_size):
        stop = start + block_size
        yield data.X[start:stop], data.y[start:stop]


def cholesky_reduce(blocks: Iterable, check_rank: bool = True) -> ReducedData:
    """Reduce row blocks through the Cholesky factor of the Gram matrix of ``[X y]``.

    The Gram matrix is accumulated block by block in the order given, so the
    full data never has to be resident.  Only ``X^T X`` is Cholesky-factored;
    ``Q^T y`` and the residual are then obtained from the triangular solve
    ``R^T y_proj = X^T y``.  This is the same factor as the block structure of
    the augmented Cholesky, but it does not break down when ``y`` lies in the
    span of ``X`` (zero residual).
    """
    gram = xty = None
    yty = 0.0
    n_rows = 0
    for Xb, yb in blocks:
        Xb = np.asarray(Xb, dtype=np.float64)
        yb = np.asarray(yb, dtype=np.float64).ravel()
        if Xb.ndim != 2 or Xb.shape[0] != yb.shape[0]:
            raise InvalidInputError("each block must be a 2-D X with a matching y")
        if gram is None:
            gram = np.zeros((Xb.shape[1], Xb.shape[1]))
            xty = np.zeros(Xb.shape[1])
        elif Xb.shape[1] != gram.shape[0]:
            raise InvalidInputError("all blocks must have the same number of features")
        gram += Xb.T @ Xb
        xty += Xb.T @ yb
        yty += float(yb @ yb)
        n_rows += Xb.shape[0]
    if gram is None:
        raise InvalidInputError("no blocks supplied")
    p = gram.shape[0]
    if n_rows < p:
        raise InvalidInputError(f"need at least as many rows as features, got {n_rows} < {p}")
    try:
        R = np.linalg.cholesky(gram).T
    except np.linalg.LinAlgError as exc:
        raise ConditioningError(
            "Gram matrix is not positive definite; Cholesky factorization is "
            "less stable than QR, use the QR reduction instead"
        ) from exc
    if check_rank:
        _check_rank(R, CHOLESKY_PIVOT_TOL, ConditioningError)
    y_proj = solve_triangular(R, xty, trans="T", lower=False)
    residual_sq = max(yty - float(y_proj @ y_proj), 0.0)
    return ReducedData(np.triu(R), y_proj, residual_sq, yty)


def ridge_stack(data: Dataset, lam: float) -> Dataset:
    """Rewrite ridge regression as plain least squares on stacked data.

    ``(1/N)||X theta - y||^2 + lam ||theta||^2`` equals
    ``||X_s theta - y_s||^2`` with ``X_s = [X / sqrt(N); sqrt(lam) I]`` and
    ``y_s = [y / sqrt(N); 0]``.
    """
    lam = check_positive_real(lam, "lambda")
    N, p = data.X.shape
    root_n = np.sqrt(N)
    X_s = np.vstack([data.X / root_n, np.sqrt(lam) * np.eye(p)])
    y_s = np.concatenate([data.y / root_n, np.zeros(p)])
    return Dataset(X_s, y_s)


def reduce(data: Dataset, path: str = "qr", block_size: int = DEFAULT_BLOCK_SIZE, check_rank: bool = True) -> ReducedData:
    """Dispatch to :func:`qr_reduce` or :func:`cholesky_reduce`."""
    if path == "qr":
        return qr_reduce(data, check_rank)
    if path == "cholesky":
        return cholesky_reduce(iter_row_blocks(data, block_size), check_rank)
    raise InvalidInputError(f"unknown reduction path {path!r}; expected 'qr' or 'cholesky'")
