"""End-to-end Shapley attribution of out-of-sample R^2 with early stopping."""

from __future__ import annotations

import warnings
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np

from ._validation import (
    check_open_unit,
    check_positive_int,
    check_positive_real,
    check_seed,
)
from .chains import chain_lifts
from .exceptions import InvalidInputError, UndefinedMetricError
from .reduction import (
    DEFAULT_BLOCK_SIZE,
    CenteringInfo,
    Dataset,
    ReducedData,
    reduce,
    ridge_stack,
)
from .risk import (
    DEFAULT_RISK_DRAWS,
    AttributionEstimate,
    RiskReport,
    merge_lifts,
    risk_estimate,
    unbiased_cov,
)
from .sampling import PermutationSampler, SamplerConfig, normalize_kind


class ToleranceWarning(UserWarning):
    """Emitted when the error estimate never fell below the tolerance."""


@dataclass(frozen=True)
class RunConfig:
    """Parameters of one attribution run.

    ``max_permutations`` must be a multiple of ``batch_size``.  Under
    antithetical sampling both count base permutations; each base permutation
    and its reversal contribute one averaged lift vector.
    """

    max_permutations: int = 2**13
    batch_size: int = 2**8
    tolerance: float = 1e-2
    quantile: float = 0.95
    risk_draws: int = DEFAULT_RISK_DRAWS
    sampler: str = "argsort_qmc"
    antithetical: bool = False
    ridge_lambda: Optional[float] = None
    center: bool = True
    reduction_path: str = "qr"
    block_size: int = DEFAULT_BLOCK_SIZE
    seed: int = 0

    def __post_init__(self):
        K = check_positive_int(self.max_permutations, "max_permutations")
        B = check_positive_int(self.batch_size, "batch_size")
        if B > K or K % B:
            raise InvalidInputError(
                f"max_permutations ({K}) must be a positive multiple of batch_size ({B})"
            )
        check_positive_real(self.tolerance, "tolerance")
        check_open_unit(self.quantile, "quantile")
        check_positive_int(self.risk_draws, "risk_draws")
        check_positive_int(self.block_size, "block_size")
        check_seed(self.seed)
        object.__setattr__(self, "sampler", normalize_kind(self.sampler))
        if self.ridge_lambda is not None:
            object.__setattr__(self, "ridge_lambda", check_positive_real(self.ridge_lambda, "lambda"))
        if self.reduction_path not in ("qr", "cholesky"):
            raise InvalidInputError(
                f"reduction_path must be 'qr' or 'cholesky', got {self.reduction_path!r}"
            )

    def sampler_config(self, p: int) -> SamplerConfig:
        return SamplerConfig(self.sampler, self._seeds()[0], self.antithetical, p)

    def _seeds(self):
        perm_ss, risk_ss = np.random.SeedSequence(self.seed).spawn(2)
        return int(perm_ss.generate_state(1, np.uint64)[0]), risk_ss

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class BatchRecord:
    batch_index: int
    samples: int
    sigma_hat: float
    shapley: np.ndarray


@dataclass
class AttributionResult:
    shapley: np.ndarray
    per_feature_error: np.ndarray
    overall_error: float
    r2_full: float
    converged: bool
    batches_used: int
    total_lift_vectors: int
    history: list = field(default_factory=list)
    theta: Optional[np.ndarray] = None
    intercept: Optional[float] = None


@dataclass(frozen=True)
class PreparedProblem:
    """Both splits after centering, ridge stacking and reduction."""

    train: ReducedData
    test: ReducedData
    centering: Optional[CenteringInfo]

    @property
    def p(self) -> int:
        return self.train.p

    def full_model(self):
        theta = self.train.solve()
        r2 = 1.0 - float(self.test.sq_error(theta)) / self.test.label_sq_norm
        return theta, r2


def prepare_train(train: Dataset, config: RunConfig):
    """Center (optionally), ridge-stack (optionally) and reduce the train split."""
    info = None
    if config.center:
        info = CenteringInfo(train.X.mean(axis=0), float(train.y.mean()))
        train = info.apply(train)
    if config.ridge_lambda is not None:
        train = ridge_stack(train, config.ridge_lambda)
    return reduce(train, config.reduction_path, config.block_size), info


def prepare_test(test: Dataset, info: Optional[CenteringInfo], config: RunConfig) -> ReducedData:
    """Shift the test split by the train means and reduce it; no ridge term."""
    if info is not None:
        test = info.apply(test)
    test_red = reduce(test, config.reduction_path, config.block_size, check_rank=False)
    if test_red.label_sq_norm <= 0:
        raise UndefinedMetricError("test labels are all zero; R^2 is undefined")
    return test_red


def prepare(train: Dataset, test: Dataset, config: RunConfig) -> PreparedProblem:
    if train.p != test.p:
        raise InvalidInputError(f"train has {train.p} features but test has {test.p}")
    train_red, info = prepare_train(train, config)
    return PreparedProblem(train_red, prepare_test(test, info, config), info)


def r2_full(train: Dataset, test: Dataset, config: RunConfig = RunConfig()) -> float:
    """Out-of-sample R^2 of the model using every feature."""
    return prepare(train, test, config).full_model()[1]


def select_ridge_lambda(train: Dataset, test: Dataset, candidates: Sequence[float], config: RunConfig = RunConfig()):
    """Pick the candidate ridge parameter with the best out-of-sample R^2.

    Returns the chosen value and the R^2 of every candidate, in input order.
    """
    if not len(candidates):
        raise InvalidInputError("need at least one candidate lambda")
    scores = [
        r2_full(train, test, RunConfig(**{**config.to_dict(), "ridge_lambda": lam}))
        for lam in candidates
    ]
    return candidates[int(np.argmax(scores))], scores


def _batch_lifts(problem, perms, antithetical):
    lifts, _ = chain_lifts(problem.train, problem.test, perms)
    if antithetical:
        rev, _ = chain_lifts(problem.train, problem.test, perms[:, ::-1])
        lifts = 0.5 * (lifts + rev)
    return lifts


def attribute(train: Dataset, test: Dataset, config: RunConfig = RunConfig(), permutations=None) -> AttributionResult:
    """Estimate the Shapley attribution of out-of-sample R^2 to each feature.

    Batches of ``config.batch_size`` permutations are drawn lazily; after each
    batch the running estimate is updated and the overall error estimate is
    recomputed.  The run stops as soon as that estimate drops below
    ``config.tolerance``.  ``permutations`` (shape ``(K, p)``, 0-based)
    replaces the sampler with a fixed list, e.g. all ``p!`` orderings.
    """
    return attribute_prepared(prepare(train, test, config), config, permutations)


def attribute_prepared(problem: PreparedProblem, config: RunConfig, permutations=None) -> AttributionResult:
    """:func:`attribute` on splits that are already reduced."""
    p = problem.p
    B = config.batch_size
    if permutations is None:
        n_batches = config.max_permutations // B
        sampler = PermutationSampler(config.sampler_config(p))
        next_batch = lambda j: sampler.draw(B)  # noqa: E731
    else:
        permutations = np.asarray(permutations, dtype=np.intp)
        if permutations.ndim != 2 or permutations.shape[1] != p or len(permutations) % B:
            raise InvalidInputError(
                f"permutations must have shape (K, {p}) with K a multiple of {B}"
            )
        n_batches = len(permutations) // B
        next_batch = lambda j: permutations[j * B:(j + 1) * B]  # noqa: E731
    risk_rng = np.random.default_rng(config._seeds()[1])

    theta, r2 = problem.full_model()
    est = AttributionEstimate.empty(p, B)
    report = RiskReport(np.full(p, np.inf), np.inf, config.quantile, config.risk_draws)
    history = []
    converged = False
    for j in range(n_batches):
        est = merge_lifts(est, _batch_lifts(problem, next_batch(j), config.antithetical))
        if est.total_samples >= 2:
            report = risk_estimate(
                unbiased_cov(est), est.total_samples, config.quantile, config.risk_draws, risk_rng
            )
        history.append(BatchRecord(j, est.total_samples, report.overall, est.s_hat.copy()))
        if report.overall < config.tolerance:
            converged = True
            break
    if not converged:
        warnings.warn(
            f"tolerance not reached: estimated overall error {report.overall:.3g} "
            f">= {config.tolerance:.3g} after {est.total_samples} lift vectors",
            ToleranceWarning,
            stacklevel=3,
        )
    intercept = problem.centering.intercept(theta) if problem.centering is not None else None
    return AttributionResult(
        shapley=est.s_hat,
        per_feature_error=report.per_feature,
        overall_error=report.overall,
        r2_full=r2,
        converged=converged,
        batches_used=est.batches_done,
        total_lift_vectors=est.total_samples,
        history=history,
        theta=theta,
        intercept=intercept,
    )
