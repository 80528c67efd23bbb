"""scikit-learn compatible front end."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import as_matrix, as_xy
from .exceptions import InvalidInputError
from .pipeline import (
    AttributionResult,
    PreparedProblem,
    RunConfig,
    attribute_prepared,
    prepare_test,
    prepare_train,
)
from .reduction import Dataset
from .risk import DEFAULT_RISK_DRAWS


class ShapleyAttributor(RegressorMixin, BaseEstimator):
    """Least-squares (optionally ridge) regressor with Shapley R^2 attribution.

    ``fit`` reduces the training data once and fits the full model.
    ``attribute`` then splits the out-of-sample R^2 on a held-out set across
    the features.  Hyperparameters mirror :class:`~lsspa.pipeline.RunConfig`.

    Attributes
    ----------
    coef_ : ndarray of shape (n_features,)
    intercept_ : float
        0.0 when ``center=False``.
    shapley_values_ : ndarray of shape (n_features,)
        Set by :meth:`attribute`.
    shapley_errors_ : ndarray of shape (n_features,)
        Per-feature error estimates, set by :meth:`attribute`.
    attribution_ : AttributionResult
        Full result of the last :meth:`attribute` call.
    """

    def __init__(
        self,
        *,
        max_permutations=2**13,
        batch_size=2**8,
        tolerance=1e-2,
        quantile=0.95,
        risk_draws=DEFAULT_RISK_DRAWS,
        sampler="argsort_qmc",
        antithetical=False,
        ridge_lambda=None,
        center=True,
        reduction_path="qr",
        seed=0,
    ):
        self.max_permutations = max_permutations
        self.batch_size = batch_size
        self.tolerance = tolerance
        self.quantile = quantile
        self.risk_draws = risk_draws
        self.sampler = sampler
        self.antithetical = antithetical
        self.ridge_lambda = ridge_lambda
        self.center = center
        self.reduction_path = reduction_path
        self.seed = seed

    def _config(self) -> RunConfig:
        return RunConfig(**self.get_params())

    def fit(self, X, y):
        X, y = as_xy(X, y)
        config = self._config()
        self.train_reduced_, self.centering_ = prepare_train(Dataset(X, y), config)
        self.coef_ = self.train_reduced_.solve()
        self.intercept_ = 0.0 if self.centering_ is None else self.centering_.intercept(self.coef_)
        self.n_features_in_ = X.shape[1]
        return self

    def predict(self, X):
        check_is_fitted(self, "coef_")
        X = as_matrix(X)
        self._check_width(X)
        return X @ self.coef_ + self.intercept_

    def _check_width(self, X):
        if X.shape[1] != self.n_features_in_:
            raise InvalidInputError(
                f"X has {X.shape[1]} features, but the model was fitted with {self.n_features_in_}"
            )

    def _problem(self, X, y) -> PreparedProblem:
        check_is_fitted(self, "coef_")
        X, y = as_xy(X, y)
        self._check_width(X)
        test_red = prepare_test(Dataset(X, y), self.centering_, self._config())
        return PreparedProblem(self.train_reduced_, test_red, self.centering_)

    def oos_r2(self, X, y) -> float:
        """Out-of-sample R^2 relative to the zero predictor on train-centered labels."""
        return self._problem(X, y).full_model()[1]

    def attribute(self, X, y, permutations=None) -> AttributionResult:
        """Attribute the out-of-sample R^2 on ``(X, y)`` to the features."""
        result = attribute_prepared(self._problem(X, y), self._config(), permutations)
        self.attribution_ = result
        self.shapley_values_ = result.shapley
        self.shapley_errors_ = result.per_feature_error
        return result

    def fit_attribute(self, X, y, X_test, y_test) -> np.ndarray:
        """Fit on ``(X, y)`` and return the Shapley values on the test split."""
        return self.fit(X, y).attribute(X_test, y_test).shapley
