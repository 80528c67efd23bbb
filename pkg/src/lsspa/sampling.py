"""Permutation sources: uniform Monte Carlo and argsort quasi-Monte Carlo.

Argsort QMC takes a scrambled Sobol' point in ``[0, 1)^p`` and uses the order
that sorts its coordinates as the feature chain.  Antithetical pairing is not
applied here; a sampler only emits base permutations and the caller decides
whether to also evaluate their reversals.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.stats import qmc

from ._validation import check_positive_int, check_seed
from .chains import Permutation
from .exceptions import InvalidInputError, UnsupportedDimensionError

MONTE_CARLO = "monte_carlo"
ARGSORT_QMC = "argsort_qmc"
SAMPLER_KINDS = (MONTE_CARLO, ARGSORT_QMC)

#: Largest dimension covered by the bundled Sobol' direction numbers.
SOBOL_MAX_DIMENSION = qmc.Sobol.MAXDIM

_ALIASES = {"mc": MONTE_CARLO, "argsort-qmc": ARGSORT_QMC, "qmc": ARGSORT_QMC}


def normalize_kind(kind: str) -> str:
    kind = _ALIASES.get(kind, kind)
    if kind not in SAMPLER_KINDS:
        raise InvalidInputError(f"unknown sampler {kind!r}; expected one of {SAMPLER_KINDS}")
    return kind


@dataclass(frozen=True)
class SamplerConfig:
    kind: str = ARGSORT_QMC
    seed: int = 0
    antithetical: bool = False
    dimension: int = 1

    def __post_init__(self):
        object.__setattr__(self, "kind", normalize_kind(self.kind))
        object.__setattr__(self, "seed", check_seed(self.seed))
        object.__setattr__(self, "dimension", check_positive_int(self.dimension, "dimension"))
        object.__setattr__(self, "antithetical", bool(self.antithetical))


class SobolStream:
    """Stateful Sobol' point source in ``[0, 1)^dimension``.

    Scrambling is a left linear matrix scramble followed by a digital random
    shift, drawn from ``seed``.  The first point (index 0, all zeros before
    scrambling) is always skipped.
    """

    def __init__(self, dimension: int, seed: int | None = 0, scramble: bool = True):
        dimension = check_positive_int(dimension, "dimension")
        if dimension > SOBOL_MAX_DIMENSION:
            raise UnsupportedDimensionError(
                f"Sobol' direction numbers cover at most {SOBOL_MAX_DIMENSION} "
                f"dimensions, requested {dimension}"
            )
        self.dimension = dimension
        self.scramble = scramble
        self._engine = qmc.Sobol(dimension, scramble=scramble, rng=np.random.default_rng(seed))
        self._engine.fast_forward(1)

    @property
    def index(self) -> int:
        """Sequence number of the next point to be emitted."""
        return self._engine.num_generated

    def next_points(self, n: int) -> np.ndarray:
        n = check_positive_int(n, "n")
        with warnings.catch_warnings():
            # batch boundaries are deliberately not rounded to powers of two
            warnings.simplefilter("ignore", UserWarning)
            return self._engine.random(n)


def sobol_next(stream: SobolStream) -> np.ndarray:
    return stream.next_points(1)[0]


def uniform_permutation(rng: np.random.Generator, p: int) -> Permutation:
    """Uniformly random ordering of ``p`` features (Fisher-Yates)."""
    return Permutation(rng.permutation(check_positive_int(p, "p")))


def argsort_permutation(point) -> Permutation:
    """Order that sorts ``point`` ascending; ties go to the lower index."""
    return Permutation(np.argsort(np.asarray(point, dtype=np.float64), kind="stable"))


class PermutationSampler:
    """Draws base permutations for a :class:`SamplerConfig` in consecutive chunks.

    Successive calls to :meth:`draw` continue one stream, so drawing ``a`` then
    ``b`` rows gives the same permutations as drawing ``a + b`` at once.
    """

    def __init__(self, config: SamplerConfig):
        self.config = config
        if config.kind == MONTE_CARLO:
            self._rng = np.random.default_rng(config.seed)
        else:
            self._sobol = SobolStream(config.dimension, seed=config.seed)

    def draw(self, count: int) -> np.ndarray:
        """Return ``count`` permutations as a ``(count, p)`` array of 0-based indices."""
        count = check_positive_int(count, "count")
        p = self.config.dimension
        if self.config.kind == MONTE_CARLO:
            base = np.broadcast_to(np.arange(p), (count, p))
            return self._rng.permuted(base, axis=1)
        return np.argsort(self._sobol.next_points(count), axis=1, kind="stable")


def permutation_stream(config: SamplerConfig, count: int) -> list:
    """The first ``count`` base permutations of ``config`` as :class:`Permutation` objects."""
    return [Permutation(row) for row in PermutationSampler(config).draw(count)]
