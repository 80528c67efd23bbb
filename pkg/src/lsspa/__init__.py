"""Shapley attribution of out-of-sample R^2 for least-squares regression."""

from .chains import (
    ChainSolution,
    LiftVector,
    Permutation,
    chain_lifts,
    evaluate_chain,
    lift_vector,
    reverse,
    solve_chain,
)
from .estimator import ShapleyAttributor
from .exact import exact_shapley, subset_r2_oracle
from .exceptions import (
    ConditioningError,
    InsufficientSamplesError,
    InvalidInputError,
    LSSPAError,
    NumericalError,
    RankDeficientError,
    UndefinedMetricError,
    UnsupportedDimensionError,
)
from .pipeline import (
    AttributionResult,
    RunConfig,
    ToleranceWarning,
    attribute,
    r2_full,
    select_ridge_lambda,
)
from .reduction import (
    CenteringInfo,
    Dataset,
    ReducedData,
    center,
    cholesky_reduce,
    qr_reduce,
    ridge_stack,
)
from .sampling import SamplerConfig, permutation_stream
from .synthdata import SynthSpec, gen_correlation, gen_dataset, gen_toy

__version__ = "0.1.0"
