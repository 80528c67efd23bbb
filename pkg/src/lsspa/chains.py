"""Nested least-squares fits along a feature chain, solved with one factorization.

A permutation ``pi`` orders the features; model ``k`` of the chain uses the
first ``k`` of them.  With ``R[:, pi] = Qt Rt`` every nested model comes out of
the single triangular solve ``Rt Theta = triu(Qt^T y_proj 1^T)``: column ``k``
of ``Theta`` holds the coefficients of model ``k`` in permuted coordinates.

All internal routines work on a stack of permutations, shape ``(B, p)`` with
0-based feature indices, so a batch of chains costs a handful of batched
LAPACK calls.  The single-chain functions are thin wrappers over the same code.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exceptions import InvalidInputError, NumericalError, UndefinedMetricError
from .reduction import ReducedData


@dataclass(frozen=True)
class Permutation:
    """Feature ordering ``order`` (0-based) and its inverse.

    ``order[k]`` is the feature added at chain position ``k``;
    ``inverse[j]`` is the chain position at which feature ``j`` enters.
    """

    order: np.ndarray
    inverse: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        order = np.asarray(self.order, dtype=np.intp)
        p = order.size
        if order.ndim != 1 or p == 0:
            raise InvalidInputError("permutation must be a non-empty 1-D sequence")
        inverse = np.full(p, -1, dtype=np.intp)
        if order.min() < 0 or order.max() >= p:
            raise InvalidInputError(f"{order.tolist()} is not a permutation of 0..{p - 1}")
        inverse[order] = np.arange(p)
        if (inverse < 0).any():
            raise InvalidInputError(f"{order.tolist()} is not a permutation of 0..{p - 1}")
        object.__setattr__(self, "order", order)
        object.__setattr__(self, "inverse", inverse)

    @classmethod
    def from_one_based(cls, order):
        return cls(np.asarray(order, dtype=np.intp) - 1)

    def one_based(self) -> tuple:
        return tuple(int(i) + 1 for i in self.order)

    @property
    def p(self) -> int:
        return self.order.size

    def __eq__(self, other):
        return isinstance(other, Permutation) and np.array_equal(self.order, other.order)

    def __hash__(self):
        return hash(self.order.tobytes())


def reverse(perm: Permutation) -> Permutation:
    """The antithetical partner: the same features added in reverse order."""
    return Permutation(perm.order[::-1])


@dataclass(frozen=True)
class ChainSolution:
    """Upper triangular ``theta_tilde``; column ``k`` fits the first ``k + 1`` features."""

    theta_tilde: np.ndarray
    perm: Permutation

    def parameters(self) -> np.ndarray:
        """Coefficients in original feature coordinates, one column per chain step."""
        theta = np.empty_like(self.theta_tilde)
        theta[self.perm.order, :] = self.theta_tilde
        return theta


@dataclass(frozen=True)
class LiftVector:
    """Per-feature R^2 increments for one chain, indexed by feature."""

    lifts: np.ndarray
    r2_full: float


def _as_perm_stack(perms, p):
    perms = np.asarray(perms, dtype=np.intp)
    if perms.ndim == 1:
        perms = perms[None, :]
    if perms.ndim != 2 or perms.shape[1] != p:
        raise InvalidInputError(f"permutations must have shape (B, {p}), got {perms.shape}")
    return perms


def _permuted_columns(R, perms):
    # (B, p, p) stack with R[:, perm_b] in slot b; gather, never a permutation matrix
    return np.moveaxis(R[:, perms], 1, 0)


def solve_chains(train: ReducedData, perms) -> np.ndarray:
    """Chain coefficient matrices for a stack of permutations, shape ``(B, p, p)``."""
    p = train.p
    perms = _as_perm_stack(perms, p)
    B = perms.shape[0]
    aug = np.empty((B, p, p + 1))
    aug[:, :, :p] = _permuted_columns(train.R, perms)
    aug[:, :, p] = train.y_proj
    # Qt never materializes: QR of [R P^T | y_proj] leaves Qt^T y_proj in the last column
    fac = np.linalg.qr(aug, mode="r")
    Rt = np.triu(fac[:, :, :p])
    q = fac[:, :, p]
    diag = np.diagonal(Rt, axis1=1, axis2=2)
    signs = np.where(diag < 0, -1.0, 1.0)
    Rt = Rt * signs[:, :, None]
    q = q * signs
    if (np.abs(diag) <= np.finfo(float).tiny).any():
        raise NumericalError("permuted triangular factor is singular")
    rhs = np.triu(np.broadcast_to(q[:, :, None], (B, p, p)))
    theta = np.triu(np.linalg.solve(Rt, rhs))
    if not np.isfinite(theta).all():
        raise NumericalError("chain solve produced non-finite coefficients")
    return theta


def evaluate_chains(theta, perms, test: ReducedData) -> np.ndarray:
    """Out-of-sample R^2 along each chain, shape ``(B, p + 1)``; column 0 is 0."""
    if test.label_sq_norm <= 0:
        raise UndefinedMetricError("test labels are all zero; R^2 is undefined")
    p = test.p
    perms = _as_perm_stack(perms, p)
    theta = np.asarray(theta, dtype=np.float64)
    if theta.ndim == 2:
        theta = theta[None]
    pred = _permuted_columns(test.R, perms) @ theta
    err = np.sum((pred - test.y_proj[None, :, None]) ** 2, axis=1) + test.residual_sq
    r2 = np.zeros((perms.shape[0], p + 1))
    r2[:, 1:] = 1.0 - err / test.label_sq_norm
    return r2


def lifts_from_r2(r2_seq, perms) -> np.ndarray:
    """Scatter chain-position R^2 increments back to feature slots, shape ``(B, p)``."""
    r2_seq = np.atleast_2d(np.asarray(r2_seq, dtype=np.float64))
    perms = _as_perm_stack(perms, r2_seq.shape[1] - 1)
    lifts = np.empty(perms.shape)
    np.put_along_axis(lifts, perms, np.diff(r2_seq, axis=1), axis=1)
    return lifts


def chain_lifts(train: ReducedData, test: ReducedData, perms) -> tuple:
    """Lift vectors for a stack of permutations.

    Returns
    -------
    lifts : ndarray of shape (B, p)
    r2_full : ndarray of shape (B,)
        Full-model R^2 as reached at the end of each chain.
    """
    if train.p != test.p:
        raise InvalidInputError(f"train has {train.p} features but test has {test.p}")
    perms = _as_perm_stack(perms, train.p)
    r2 = evaluate_chains(solve_chains(train, perms), perms, test)
    return lifts_from_r2(r2, perms), r2[:, -1]


def solve_chain(train: ReducedData, perm: Permutation) -> ChainSolution:
    return ChainSolution(solve_chains(train, perm.order)[0], perm)


def evaluate_chain(sol: ChainSolution, test: ReducedData) -> np.ndarray:
    """R^2 of each nested model on the test split, ``(R2_0 = 0, R2_1, ..., R2_p)``."""
    return evaluate_chains(sol.theta_tilde, sol.perm.order, test)[0]


def lift_vector(r2_seq, perm: Permutation) -> LiftVector:
    """Convert a chain's R^2 sequence into lifts indexed by feature."""
    r2_seq = np.asarray(r2_seq, dtype=np.float64)
    if r2_seq.shape != (perm.p + 1,):
        raise InvalidInputError(
            f"expected an R^2 sequence of length {perm.p + 1}, got {r2_seq.shape}"
        )
    return LiftVector(lifts_from_r2(r2_seq, perm.order)[0], float(r2_seq[-1]))
