"""Seedable Gaussian sampling with counter-based stream splitting.

The bit source is Philox4x64-10 keyed by the pair ``(seed, stream)``.
Philox is a counter-based generator: distinct keys index statistically
independent random functions, so streams obtained from :func:`split` are
non-overlapping by construction and individually re-runnable.

One raw 64-bit word maps to exactly one standard normal deviate through
the inverse CDF:

    u = (word >> 11) * 2**-53 + 2**-54      # uniform on (0, 1)
    z = ndtri(u)                            # inverse standard normal CDF

This mapping is part of the library's frozen-stream contract (golden
values in the test suite pin it); never change it silently.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

from .errors import DimensionMismatch, InvalidInputs
from .linalg import SpdMatrix, as_dense

_U64_MAX = 2**64 - 1


class Prng:
    """Deterministic normal-deviate stream for one (seed, stream) key.

    Single-owner: concurrent consumers must each hold their own split
    stream, never share one instance.
    """

    __slots__ = ("seed", "stream", "_bitgen")

    def __init__(self, seed: int, stream: int = 0):
        if not (0 <= seed <= _U64_MAX):
            raise InvalidInputs("seed must be an unsigned 64-bit integer")
        if not (0 <= stream <= _U64_MAX):
            raise InvalidInputs("stream must be an unsigned 64-bit integer")
        self.seed = seed
        self.stream = stream
        self._bitgen = np.random.Philox(key=np.array([seed, stream], dtype=np.uint64))

    def raw(self, count: int) -> np.ndarray:
        """Next ``count`` raw 64-bit words from the Philox stream."""
        return np.atleast_1d(self._bitgen.random_raw(count))

    def normal(self, shape) -> np.ndarray:
        """Array of standard normal deviates, one raw word per deviate.

        Arrays are filled in row-major order, so ``normal((a, b))``
        consumes the same words as ``a * b`` scalar draws.
        """
        if np.isscalar(shape):
            shape = (int(shape),)
        count = int(np.prod(shape))
        words = self.raw(count)
        u = (words >> np.uint64(11)).astype(np.float64) * 2.0**-53 + 2.0**-54
        return ndtri(u).reshape(shape)

    def standard_normal(self) -> float:
        """One standard normal deviate."""
        return float(self.normal(1)[0])

    def derive_seed(self) -> int:
        """Next raw word as an integer, for seeding subordinate models."""
        return int(self.raw(1)[0])

    def __repr__(self) -> str:
        return f"Prng(seed={self.seed}, stream={self.stream})"


def split(master_seed: int, k: int) -> Prng:
    """Independent stream ``k`` under ``master_seed``.

    Keys (seed, k) with distinct k index distinct Philox random functions,
    so trial streams never overlap regardless of how much each consumes.
    """
    return Prng(master_seed, stream=k)


@dataclass(frozen=True)
class SampleBatch:
    """Matched pair of an independent sample matrix and its correlated mix.

    ``x`` holds independent N(0, sigma) columns; ``y = x @ lam`` is the
    deterministic product with the model's mixing matrix.
    """

    n: int
    m: int
    x: np.ndarray
    y: np.ndarray


def sample_x(rng: Prng, n: int, m: int, sigma: SpdMatrix) -> np.ndarray:
    """n x m matrix whose columns are independent N(0, sigma) vectors.

    Each column is ``chol(sigma) @ g`` with ``g`` standard normal.  The
    identity covariance skips the multiply; the result is bitwise the
    same as multiplying by the identity factor.
    """
    if n < 1 or m < 1:
        raise InvalidInputs("n and m must be positive")
    if sigma.dim != n:
        raise DimensionMismatch(f"sigma has dim {sigma.dim}, expected {n}")
    g = rng.normal((n, m))
    if sigma.is_identity:
        return g
    return sigma.chol @ g


def correlate(x, model) -> SampleBatch:
    """Batch with ``y = x @ lam`` for the model's materialized mixing matrix."""
    x = as_dense(x, "x")
    if x.shape[1] != model.m:
        raise DimensionMismatch(
            f"x has {x.shape[1]} columns but the model expects {model.m}"
        )
    y = x @ model.lam()
    return SampleBatch(n=x.shape[0], m=x.shape[1], x=x, y=y)
