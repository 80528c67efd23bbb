import warnings

import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError
from sklearn.pipeline import make_pipeline
from sklearn.preprocessing import StandardScaler

from lsspa import Dataset, InvalidInputError, RunConfig, ShapleyAttributor, ToleranceWarning, attribute

from conftest import random_problem


@pytest.fixture
def problem(rng):
    train, test = random_problem(rng, 120, 4)
    return train.X + 1.5, train.y + 3.0, test.X + 1.5, test.y + 3.0


class TestParams:
    def test_get_params_defaults(self):
        params = ShapleyAttributor().get_params()
        assert params["max_permutations"] == 2**13 and params["sampler"] == "argsort_qmc"
        RunConfig(**params)

    def test_clone_and_set_params(self):
        est = ShapleyAttributor(seed=3, antithetical=True)
        copy = clone(est)
        assert copy.get_params() == est.get_params()
        copy.set_params(ridge_lambda=0.1)
        assert copy.ridge_lambda == 0.1 and est.ridge_lambda is None

    def test_invalid_params_raise_at_fit(self, problem):
        X, y, *_ = problem
        with pytest.raises(InvalidInputError):
            ShapleyAttributor(batch_size=3, max_permutations=10).fit(X, y)


class TestFitPredict:
    def test_matches_least_squares_with_intercept(self, problem):
        X, y, *_ = problem
        est = ShapleyAttributor().fit(X, y)
        A = np.column_stack([X, np.ones(len(y))])
        full = np.linalg.lstsq(A, y, rcond=None)[0]
        np.testing.assert_allclose(est.coef_, full[:-1], rtol=1e-8)
        assert abs(est.intercept_ - full[-1]) < 1e-8
        np.testing.assert_allclose(est.predict(X), A @ full, rtol=1e-8)
        assert est.n_features_in_ == 4

    def test_no_center(self, problem):
        X, y, *_ = problem
        est = ShapleyAttributor(center=False).fit(X, y)
        assert est.intercept_ == 0.0
        np.testing.assert_allclose(est.coef_, np.linalg.lstsq(X, y, rcond=None)[0], rtol=1e-8)

    def test_not_fitted(self, problem):
        with pytest.raises(NotFittedError):
            ShapleyAttributor().predict(problem[0])

    def test_width_mismatch(self, problem):
        X, y, *_ = problem
        with pytest.raises(InvalidInputError):
            ShapleyAttributor().fit(X, y).predict(X[:, :3])

    def test_score_is_sklearn_r2(self, problem):
        X, y, Xt, yt = problem
        est = ShapleyAttributor().fit(X, y)
        resid = est.predict(Xt) - yt
        assert abs(est.score(Xt, yt) - (1 - resid @ resid / np.sum((yt - yt.mean()) ** 2))) < 1e-12


class TestAttribute:
    def test_matches_functional_api(self, problem):
        X, y, Xt, yt = problem
        kw = dict(max_permutations=64, batch_size=16, tolerance=1e-12, seed=2)
        est = ShapleyAttributor(**kw).fit(X, y)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ToleranceWarning)
            res = est.attribute(Xt, yt)
            ref = attribute(Dataset(X, y), Dataset(Xt, yt), RunConfig(**kw))
        np.testing.assert_array_equal(res.shapley, ref.shapley)
        np.testing.assert_array_equal(est.shapley_values_, ref.shapley)
        np.testing.assert_array_equal(est.shapley_errors_, ref.per_feature_error)
        assert abs(est.oos_r2(Xt, yt) - ref.r2_full) < 1e-14
        assert abs(est.shapley_values_.sum() - est.oos_r2(Xt, yt)) < 1e-8

    def test_fit_attribute(self, problem):
        X, y, Xt, yt = problem
        s = ShapleyAttributor(seed=1).fit_attribute(X, y, Xt, yt)
        assert s.shape == (4,)

    def test_inside_pipeline(self, problem):
        X, y, Xt, yt = problem
        pipe = make_pipeline(StandardScaler(), ShapleyAttributor())
        pipe.fit(X, y)
        plain = ShapleyAttributor().fit(X, y)
        # scaling changes the coefficients but not the fitted values
        np.testing.assert_allclose(pipe.predict(Xt), plain.predict(Xt), rtol=1e-8)
