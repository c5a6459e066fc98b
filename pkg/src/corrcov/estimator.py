"""Correlated sample covariance (compound Wishart) and error metrics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch
from .linalg import SpdMatrix, as_dense, frobenius_norm, spectral_norm, symmetrize
from .sampling import SampleBatch

# Error-norm power iterations get a generous budget: deviation matrices
# occasionally have near-tied extreme eigenvalues, which slows the
# Rayleigh stopping rule well past the library default.
_ERROR_NORM_MAX_ITER = 200_000


@dataclass(frozen=True)
class CovEstimate:
    """Symmetric covariance estimate from m (possibly correlated) samples."""

    n: int
    m: int
    sigma_hat: np.ndarray


def sample_covariance(batch: SampleBatch) -> CovEstimate:
    """(1/m) * y @ y.T, symmetrized against floating-point drift."""
    y = batch.y
    return CovEstimate(n=batch.n, m=batch.m, sigma_hat=symmetrize(y @ y.T / batch.m))


def compound_wishart(x, b) -> CovEstimate:
    """(1/m) * x @ b @ x.T for a fixed symmetric shape matrix b.

    With b = lam @ lam.T this equals ``sample_covariance`` of the
    correlated batch up to roundoff.  b may be any symmetric matrix, not
    necessarily positive semidefinite.
    """
    x = as_dense(x, "x")
    b = as_dense(b, "b")
    if b.shape[0] != b.shape[1]:
        raise DimensionMismatch(f"b must be square, got shape {b.shape}")
    if b.shape[0] != x.shape[1]:
        raise DimensionMismatch(
            f"b has {b.shape[0]} rows but x has {x.shape[1]} columns"
        )
    m = x.shape[1]
    return CovEstimate(n=x.shape[0], m=m, sigma_hat=symmetrize(x @ b @ x.T / m))


def spectral_error(est: CovEstimate, sigma: SpdMatrix) -> float:
    """Spectral norm of the estimation error, ||sigma_hat - sigma||."""
    if est.sigma_hat.shape[0] != sigma.dim:
        raise DimensionMismatch(
            f"estimate has dim {est.sigma_hat.shape[0]}, sigma has {sigma.dim}"
        )
    return spectral_norm(est.sigma_hat - sigma.matrix, max_iter=_ERROR_NORM_MAX_ITER)


def relative_frobenius_error(est: CovEstimate, sigma: SpdMatrix) -> float:
    """||sigma_hat - sigma||_F / ||sigma||_F."""
    if est.sigma_hat.shape[0] != sigma.dim:
        raise DimensionMismatch(
            f"estimate has dim {est.sigma_hat.shape[0]}, sigma has {sigma.dim}"
        )
    return frobenius_norm(est.sigma_hat - sigma.matrix) / frobenius_norm(sigma.matrix)
