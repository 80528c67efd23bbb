"""Input validation helpers shared by the functional API and the estimator."""

from __future__ import annotations

import numbers

import numpy as np
from sklearn.utils.validation import check_array, check_X_y

from .exceptions import InvalidInputError


def as_matrix(X, name="X"):
    """Return ``X`` as a finite 2-D float64 array."""
    try:
        return check_array(X, dtype=np.float64, ensure_2d=True, ensure_min_samples=1)
    except ValueError as exc:
        raise InvalidInputError(f"{name}: {exc}") from exc


def as_xy(X, y):
    """Validate a feature matrix and label vector of matching length."""
    try:
        X, y = check_X_y(X, y, dtype=np.float64, y_numeric=True)
    except ValueError as exc:
        raise InvalidInputError(str(exc)) from exc
    return X, y


def check_positive_int(value, name):
    if isinstance(value, bool) or not isinstance(value, numbers.Integral) or value < 1:
        raise InvalidInputError(f"{name} must be a positive integer, got {value!r}")
    return int(value)


def check_positive_real(value, name):
    if isinstance(value, bool) or not isinstance(value, numbers.Real):
        raise InvalidInputError(f"{name} must be a real number, got {value!r}")
    if not np.isfinite(value) or value <= 0:
        raise InvalidInputError(f"{name} must be positive, got {value!r}")
    return float(value)


def check_open_unit(value, name):
    if isinstance(value, bool) or not isinstance(value, numbers.Real):
        raise InvalidInputError(f"{name} must be a real number, got {value!r}")
    if not 0.0 < value < 1.0:
        raise InvalidInputError(f"{name} must lie in (0, 1), got {value!r}")
    return float(value)


def check_seed(seed):
    if isinstance(seed, bool) or not isinstance(seed, numbers.Integral):
        raise InvalidInputError(f"seed must be an integer, got {seed!r}")
    if not 0 <= seed < 2**64:
        raise InvalidInputError(f"seed must be a 64-bit unsigned integer, got {seed!r}")
    return int(seed)
