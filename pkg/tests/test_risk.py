import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lsspa import InsufficientSamplesError, InvalidInputError, LiftVector, NumericalError
from lsspa.risk import (
    AttributionEstimate,
    batch_stats,
    merge_batch,
    merge_lifts,
    risk_estimate,
    unbiased_cov,
)


def two_pass(L):
    mean = sum(L) / len(L)
    cov = sum(np.outer(v - mean, v - mean) for v in L) / len(L)
    return mean, cov


class TestBatchStats:
    def test_single_vector(self):
        v = np.array([0.3, -0.1, 0.7])
        mean, cov = batch_stats([LiftVector(v, v.sum())])
        np.testing.assert_array_equal(mean, v)
        np.testing.assert_array_equal(cov, 0.0)

    def test_two_vectors(self):
        v, w = np.array([1.0, 2.0]), np.array([3.0, -1.0])
        mean, cov = batch_stats(np.array([v, w]))
        np.testing.assert_allclose(mean, (v + w) / 2)
        np.testing.assert_allclose(cov, np.outer(v - w, v - w) / 4)

    def test_matches_two_pass(self, rng):
        L = rng.standard_normal((100, 6)) * [1, 2, 3, 0.1, 5, 1] + 3
        mean, cov = batch_stats(L)
        m2, c2 = two_pass(list(L))
        np.testing.assert_allclose(mean, m2, rtol=1e-10)
        np.testing.assert_allclose(cov, c2, rtol=1e-10)

    def test_empty(self):
        with pytest.raises(InvalidInputError):
            batch_stats(np.empty((0, 3)))


class TestMergeBatch:
    def test_first_batch_is_batch_stats(self, rng):
        L = rng.standard_normal((8, 3))
        est = merge_lifts(AttributionEstimate.empty(3, 8), L)
        mean, cov = batch_stats(L)
        np.testing.assert_array_equal(est.s_hat, mean)
        np.testing.assert_array_equal(est.cov_biased, cov)
        assert est.batches_done == 1 and est.total_samples == 8

    def test_two_batches_equal_pooled(self, rng):
        L = rng.standard_normal((100, 4)) + 1.5
        est = AttributionEstimate.empty(4, 50)
        est = merge_lifts(merge_lifts(est, L[:50]), L[50:])
        mean, cov = two_pass(list(L))
        np.testing.assert_allclose(est.s_hat, mean, rtol=1e-10)
        np.testing.assert_allclose(est.cov_biased, cov, rtol=1e-10)

    def test_zero_fixed_point(self):
        est = merge_batch(AttributionEstimate.empty(3, 4), np.zeros(3), np.zeros((3, 3)))
        np.testing.assert_array_equal(est.s_hat, 0.0)
        np.testing.assert_array_equal(est.cov_biased, 0.0)

    def test_empty_estimate(self):
        est = AttributionEstimate.empty(5, 10)
        assert est.batches_done == 0 and est.total_samples == 0
        assert not est.s_hat.any() and not est.cov_biased.any()

    def test_batch_size_mismatch(self, rng):
        with pytest.raises(InvalidInputError):
            merge_lifts(AttributionEstimate.empty(3, 4), rng.standard_normal((5, 3)))

    @settings(max_examples=30, deadline=None)
    @given(
        n_batches=st.integers(1, 8), size=st.integers(1, 12), p=st.integers(1, 5),
        seed=st.integers(0, 2**32 - 1),
    )
    def test_streaming_equals_pooled(self, n_batches, size, p, seed):
        rng = np.random.default_rng(seed)
        L = rng.standard_normal((n_batches * size, p)) * rng.uniform(0.1, 3, p)
        est = AttributionEstimate.empty(p, size)
        for j in range(n_batches):
            est = merge_lifts(est, L[j * size:(j + 1) * size])
        mean, cov = two_pass(list(L))
        np.testing.assert_allclose(est.s_hat, mean, rtol=1e-10, atol=1e-13)
        np.testing.assert_allclose(est.cov_biased, cov, rtol=1e-10, atol=1e-13)
        np.testing.assert_allclose(est.cov_biased, est.cov_biased.T, atol=1e-12)
        assert np.linalg.eigvalsh(est.cov_biased).min() >= -1e-10


class TestUnbiasedCov:
    def test_factor_two(self, rng):
        est = merge_lifts(AttributionEstimate.empty(2, 2), rng.standard_normal((2, 2)))
        np.testing.assert_allclose(unbiased_cov(est), 2 * est.cov_biased)

    def test_factor_hundred(self, rng):
        L = rng.standard_normal((100, 3))
        est = merge_lifts(merge_lifts(AttributionEstimate.empty(3, 50), L[:50]), L[50:])
        np.testing.assert_allclose(unbiased_cov(est), est.cov_biased * 100 / 99)
        np.testing.assert_allclose(unbiased_cov(est), np.cov(L, rowvar=False), rtol=1e-10)

    def test_insufficient(self, rng):
        est = merge_lifts(AttributionEstimate.empty(2, 1), rng.standard_normal((1, 2)))
        with pytest.raises(InsufficientSamplesError):
            unbiased_cov(est)


class TestRiskEstimate:
    def test_zero_covariance(self):
        rep = risk_estimate(np.zeros((3, 3)), 10, 0.95, 100, 0)
        np.testing.assert_array_equal(rep.per_feature, 0.0)
        assert rep.overall == 0.0

    def test_scalar_normal_quantile(self):
        rep = risk_estimate(np.eye(1), 100, 0.95, 10**6, 1)
        assert abs(rep.per_feature[0] - 1.95996 / 10) <= 0.002

    def test_diagonal_quantiles(self):
        rep = risk_estimate(np.diag([4.0, 1.0]), 4, 0.95, 10**6, 2)
        np.testing.assert_allclose(rep.per_feature, [1.95996, 0.97998], atol=0.01)
        assert rep.quantile == 0.95 and rep.mc_draws == 10**6

    def test_overall_is_chi_quantile(self):
        # ||N(0, I_3)|| has 0.95 quantile sqrt(chi2_3(0.95)) = 2.7955
        rep = risk_estimate(4 * np.eye(3), 4, 0.95, 10**6, 3)
        assert abs(rep.overall - 2.7955) <= 0.01

    def test_semidefinite_is_fine(self):
        v = np.array([1.0, -1.0, 2.0])
        rep = risk_estimate(np.outer(v, v), 10, 0.9, 1000, 4)
        assert np.all(rep.per_feature >= 0) and rep.overall >= 0

    def test_indefinite_rejected(self):
        with pytest.raises(NumericalError):
            risk_estimate(np.diag([1.0, -0.5]), 10, 0.95, 100, 0)

    @pytest.mark.parametrize("q", [0.0, 1.0, 1.5])
    def test_quantile_range(self, q):
        with pytest.raises(InvalidInputError):
            risk_estimate(np.eye(2), 10, q, 100, 0)

    def test_deterministic_given_seed(self):
        a = risk_estimate(np.eye(3), 20, 0.95, 500, 42)
        b = risk_estimate(np.eye(3), 20, 0.95, 500, 42)
        np.testing.assert_array_equal(a.per_feature, b.per_feature)
        assert a.overall == b.overall
