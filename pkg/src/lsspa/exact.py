"""Exact Shapley values by exhaustive subset enumeration, for small p."""

from __future__ import annotations

from math import factorial
from typing import Callable

import numpy as np

from ._validation import check_positive_int
from .exceptions import InvalidInputError
from .reduction import Dataset

MAX_EXACT_FEATURES = 10


def exact_shapley(r2_oracle: Callable, p: int, max_features: int = MAX_EXACT_FEATURES) -> np.ndarray:
    """Shapley values of the game ``r2_oracle`` over ``p`` features.

    ``r2_oracle`` maps a ``frozenset`` of 0-based feature indices to the R^2
    of the model restricted to those features.  The average lift over all
    ``p!`` orderings is evaluated through the equivalent subset-weighted sum

        S_j = sum_{T not containing j} |T|! (p-|T|-1)! / p! * (v(T + j) - v(T))

    which needs each of the ``2^p`` subset values exactly once.
    """
    p = check_positive_int(p, "p")
    if p > max_features:
        raise InvalidInputError(
            f"exact Shapley values need all {p}! orderings (exponential cost); "
            f"refusing p > {max_features}, use Monte Carlo sampling instead"
        )
    n_sub = 1 << p
    value = np.empty(n_sub)
    size = np.empty(n_sub, dtype=int)
    for mask in range(n_sub):
        members = frozenset(j for j in range(p) if mask >> j & 1)
        value[mask] = 0.0 if mask == 0 else float(r2_oracle(members))
        size[mask] = len(members)
    weight = np.array([factorial(s) * factorial(p - s - 1) / factorial(p) for s in range(p)])
    masks = np.arange(n_sub)
    shapley = np.zeros(p)
    for j in range(p):
        without = masks[(masks >> j & 1) == 0]
        shapley[j] = np.sum(weight[size[without]] * (value[without | (1 << j)] - value[without]))
    return shapley


def subset_r2_oracle(train: Dataset, test: Dataset) -> Callable:
    """Out-of-sample R^2 of least squares on each feature subset, fitted on raw data.

    Each call solves its own least-squares problem on the unreduced train
    split, so it shares no code path with the chain solver.
    """
    denom = float(test.y @ test.y)

    def r2(subset) -> float:
        cols = sorted(subset)
        if not cols:
            return 0.0
        theta, *_ = np.linalg.lstsq(train.X[:, cols], train.y, rcond=None)
        resid = test.X[:, cols] @ theta - test.y
        return (denom - float(resid @ resid)) / denom

    return r2
