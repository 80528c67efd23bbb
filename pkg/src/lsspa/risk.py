"""Streaming Shapley estimate, lift covariance, and CLT-based error estimates."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from ._validation import check_open_unit, check_positive_int
from .exceptions import InsufficientSamplesError, InvalidInputError, NumericalError

DEFAULT_RISK_DRAWS = 1000
PSD_TOL = 1e-10


@dataclass(frozen=True)
class AttributionEstimate:
    """Running mean ``s_hat`` and biased covariance of the lift vectors seen so far."""

    s_hat: np.ndarray
    cov_biased: np.ndarray
    batches_done: int
    samples_per_batch: int

    @classmethod
    def empty(cls, p: int, samples_per_batch: int) -> "AttributionEstimate":
        return cls(np.zeros(p), np.zeros((p, p)), 0, check_positive_int(samples_per_batch, "samples_per_batch"))

    @property
    def total_samples(self) -> int:
        return self.batches_done * self.samples_per_batch


@dataclass(frozen=True)
class RiskReport:
    per_feature: np.ndarray
    overall: float
    quantile: float
    mc_draws: int


def _lift_matrix(lifts):
    if isinstance(lifts, np.ndarray):
        L = np.asarray(lifts, dtype=np.float64)
    else:
        L = np.array([getattr(v, "lifts", v) for v in lifts], dtype=np.float64)
    if L.ndim != 2 or L.shape[0] == 0:
        raise InvalidInputError("batch must contain at least one lift vector")
    return L


def batch_stats(lifts):
    """Sample mean and biased (1/n) sample covariance of a batch of lift vectors.

    ``lifts`` is a ``(B, p)`` array or a sequence of ``LiftVector``.  Under
    antithetical sampling pass the pair-averaged lifts.
    """
    L = _lift_matrix(lifts)
    mean = L.mean(axis=0)
    dev = L - mean
    return mean, dev.T @ dev / L.shape[0]


def merge_batch(est: AttributionEstimate, batch_mean, batch_cov) -> AttributionEstimate:
    """Fold one equally sized batch into the running estimate.

    With ``j`` the new batch count and ``d = s_hat_old - batch_mean``::

        s_hat = (j-1)/j s_hat_old + batch_mean / j
        cov   = (j-1)/j cov_old + batch_cov / j + (j-1)/j^2 d d^T
    """
    batch_mean = np.asarray(batch_mean, dtype=np.float64)
    batch_cov = np.asarray(batch_cov, dtype=np.float64)
    p = est.s_hat.shape[0]
    if batch_mean.shape != (p,) or batch_cov.shape != (p, p):
        raise InvalidInputError(
            f"batch statistics must have shapes ({p},) and ({p}, {p})"
        )
    j = est.batches_done + 1
    d = est.s_hat - batch_mean
    s_hat = (j - 1) / j * est.s_hat + batch_mean / j
    cov = (j - 1) / j * est.cov_biased + batch_cov / j + (j - 1) / j**2 * np.outer(d, d)
    return replace(est, s_hat=s_hat, cov_biased=cov, batches_done=j)


def merge_lifts(est: AttributionEstimate, lifts) -> AttributionEstimate:
    """Compute batch statistics for ``lifts`` and merge them; checks the batch size."""
    L = _lift_matrix(lifts)
    if L.shape[0] != est.samples_per_batch:
        raise InvalidInputError(
            f"batch has {L.shape[0]} lift vectors, expected {est.samples_per_batch}"
        )
    return merge_batch(est, *batch_stats(L))


def unbiased_cov(est: AttributionEstimate) -> np.ndarray:
    n = est.total_samples
    if n < 2:
        raise InsufficientSamplesError(
            f"unbiased covariance needs at least 2 samples, have {n}"
        )
    return est.cov_biased * (n / (n - 1))


def _psd_sqrt(cov):
    cov = 0.5 * (cov + cov.T)
    w, V = np.linalg.eigh(cov)
    scale = max(1.0, float(np.abs(w).max(initial=0.0)))
    if w.size and w.min() < -PSD_TOL * scale:
        raise NumericalError(f"covariance is indefinite (min eigenvalue {w.min():.3e})")
    return V * np.sqrt(np.clip(w, 0.0, None))


def risk_estimate(cov_unbiased, total_samples, q=0.95, draws=DEFAULT_RISK_DRAWS, rng=None) -> RiskReport:
    """Quantiles of the estimation error implied by the central limit theorem.

    Draws ``draws`` vectors from ``N(0, cov_unbiased / total_samples)`` and
    returns the ``q``-quantile of each ``|Delta_j|`` and of ``||Delta||_2``.
    """
    q = check_open_unit(q, "quantile")
    draws = check_positive_int(draws, "draws")
    total_samples = check_positive_int(total_samples, "total_samples")
    if total_samples < 2:
        raise InsufficientSamplesError("risk estimation needs at least 2 samples")
    cov = np.asarray(cov_unbiased, dtype=np.float64)
    root = _psd_sqrt(cov)
    rng = np.random.default_rng(rng)
    delta = rng.standard_normal((draws, cov.shape[0])) @ root.T / np.sqrt(total_samples)
    per_feature = np.quantile(np.abs(delta), q, axis=0)
    overall = float(np.quantile(np.linalg.norm(delta, axis=1), q))
    return RiskReport(per_feature, overall, q, draws)
