"""Minimal dense symmetric linear algebra.

Matrices are plain float64 numpy arrays in row-major order; the only
wrapper type is :class:`SpdMatrix`, which pairs a symmetric positive
definite matrix with a lazily cached Cholesky factor.

The spectral norm is computed by power iteration on ``a @ a`` with a
deterministic start vector, so repeated runs are bit-reproducible without
any RNG dependency.  ``eig_oracle`` is an exhaustive cyclic-Jacobi
eigensolver for small matrices, intended as an independent cross-check of
``spectral_norm`` in tests; production code never calls it.
"""

from __future__ import annotations

import numpy as np

from .errors import (
    ConvergenceFailure,
    DimensionMismatch,
    InvalidInputs,
    NotPositiveDefinite,
    OracleSizeExceeded,
)

# The Jacobi oracle is test-only equipment; it refuses matrices larger
# than this so it cannot creep into production paths.
JACOBI_DIM_CAP = 64

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 10_000


def as_dense(a, name: str = "matrix") -> np.ndarray:
    """Validate and return ``a`` as a finite float64 2-D array."""
    out = np.asarray(a, dtype=np.float64)
    if out.ndim != 2:
        raise DimensionMismatch(f"{name} must be 2-D, got shape {out.shape}")
    if out.shape[0] == 0 or out.shape[1] == 0:
        raise DimensionMismatch(f"{name} must be non-empty, got shape {out.shape}")
    if not np.isfinite(out).all():
        raise InvalidInputs(f"{name} contains non-finite entries")
    return out


def require_square(a: np.ndarray, name: str = "matrix") -> None:
    if a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"{name} must be square, got shape {a.shape}")


def symmetrize(a: np.ndarray) -> np.ndarray:
    """Average a nearly-symmetric matrix with its transpose."""
    return (a + a.T) / 2.0


def cholesky(a) -> np.ndarray:
    """Lower Cholesky factor L with ``L @ L.T == a``.

    Accepts an :class:`SpdMatrix` or a symmetric positive definite array.
    Unblocked column algorithm; raises :class:`NotPositiveDefinite` naming
    the first pivot whose squared value is not strictly positive.
    """
    if isinstance(a, SpdMatrix):
        a = a.matrix
    a = as_dense(a)
    require_square(a)
    n = a.shape[0]
    lower = np.zeros_like(a)
    for j in range(n):
        s = a[j, j] - lower[j, :j] @ lower[j, :j]
        if not (s > 0.0) or not np.isfinite(s):
            raise NotPositiveDefinite(j, float(s))
        d = np.sqrt(s)
        lower[j, j] = d
        if j + 1 < n:
            lower[j + 1 :, j] = (a[j + 1 :, j] - lower[j + 1 :, :j] @ lower[j, :j]) / d
    return lower


def spectral_norm(a, tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER) -> float:
    """Largest absolute eigenvalue of a symmetric matrix.

    Power iteration on ``a @ a`` (so sign-symmetric spectra converge)
    starting from the normalized all-ones vector.  Stops when successive
    Rayleigh-quotient estimates differ by at most ``tol`` relative to the
    current estimate.  If the start vector is annihilated (Rayleigh
    quotient stagnates at zero) one fixed, documented perturbation is
    tried before concluding the norm is zero.
    """
    a = as_dense(a)
    require_square(a)
    if tol <= 0.0:
        raise InvalidInputs("tol must be positive")
    if max_iter < 1:
        raise InvalidInputs("max_iter must be at least 1")
    n = a.shape[0]
    v = np.full(n, 1.0 / np.sqrt(n))
    retried = False
    estimate = None
    gap = np.inf
    for _ in range(max_iter):
        w = a @ v
        s = float(np.sqrt(w @ w))  # sqrt of the Rayleigh quotient of a @ a
        if s == 0.0:
            if retried:
                return 0.0
            # Fixed retry for a start vector orthogonal to the range.
            retried = True
            v = 1.0 + np.arange(n) / (n + 1.0)
            v /= np.linalg.norm(v)
            estimate = None
            continue
        if estimate is not None:
            gap = abs(s - estimate)
            if gap <= tol * s:
                return s
        estimate = s
        u = a @ w  # advance one step of the a @ a iteration
        v = u / np.linalg.norm(u)
    raise ConvergenceFailure(
        f"power iteration did not converge within {max_iter} iterations", gap
    )


def frobenius_norm(a) -> float:
    """Square root of the sum of squared entries."""
    a = as_dense(a)
    return float(np.sqrt((a * a).sum()))


def trace(a) -> float:
    """Sum of diagonal entries of a square matrix."""
    a = as_dense(a)
    require_square(a)
    return float(np.trace(a))


def eig_oracle(a) -> np.ndarray:
    """All eigenvalues of a small symmetric matrix, sorted descending.

    Cyclic Jacobi rotations iterated until the off-diagonal Frobenius norm
    drops to 1e-12 (with a floating-point floor proportional to the matrix
    scale, so badly scaled inputs still terminate).  Test oracle only:
    matrices larger than ``JACOBI_DIM_CAP`` are rejected.
    """
    a = as_dense(a)
    require_square(a)
    n = a.shape[0]
    if n > JACOBI_DIM_CAP:
        raise OracleSizeExceeded(
            f"eig_oracle accepts dim <= {JACOBI_DIM_CAP}, got {n}"
        )
    scale = frobenius_norm(a)
    if float(np.abs(a - a.T).max()) > 1e-10 * max(1.0, scale):
        raise InvalidInputs("eig_oracle requires a symmetric matrix")
    w = symmetrize(a).copy()
    if n == 1:
        return w.diagonal().copy()
    stop = max(1e-12, 64.0 * np.finfo(np.float64).eps * scale)
    for _ in range(200):  # each pass is one full cyclic sweep
        off = float(np.sqrt(max((w * w).sum() - (w.diagonal() ** 2).sum(), 0.0)))
        if off <= stop:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = w[p, q]
                if abs(apq) <= stop / (2.0 * n):
                    continue
                tau = (w[q, q] - w[p, p]) / (2.0 * apq)
                if tau >= 0.0:
                    t = 1.0 / (tau + np.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                rp = w[p, :].copy()
                rq = w[q, :].copy()
                w[p, :] = c * rp - s * rq
                w[q, :] = s * rp + c * rq
                cp = w[:, p].copy()
                cq = w[:, q].copy()
                w[:, p] = c * cp - s * cq
                w[:, q] = s * cp + c * cq
                w[p, q] = 0.0
                w[q, p] = 0.0
    else:
        raise ConvergenceFailure("Jacobi sweeps did not reduce off-diagonal mass", off)
    return np.sort(w.diagonal())[::-1].copy()


class SpdMatrix:
    """Symmetric positive definite matrix with a cached Cholesky factor.

    The stored matrix is exactly symmetric by construction (the input is
    averaged with its transpose, which is a bitwise no-op for an already
    symmetric input).  Positive definiteness is established by the first
    successful Cholesky factorization: every pivot must be strictly
    positive.  The factor is computed lazily on first access and cached.
    Instances are immutable and safe to share across threads.
    """

    __slots__ = ("_matrix", "_chol", "_is_identity")

    def __init__(self, matrix):
        a = as_dense(matrix, "SpdMatrix")
        require_square(a, "SpdMatrix")
        m = symmetrize(a)
        m.setflags(write=False)
        self._matrix = m
        self._chol = None
        self._is_identity = bool(np.array_equal(m, np.eye(m.shape[0])))

    @classmethod
    def identity(cls, dim: int) -> "SpdMatrix":
        if dim < 1:
            raise InvalidInputs("dim must be positive")
        return cls(np.eye(dim))

    @property
    def dim(self) -> int:
        return self._matrix.shape[0]

    @property
    def matrix(self) -> np.ndarray:
        return self._matrix

    @property
    def is_identity(self) -> bool:
        return self._is_identity

    @property
    def chol(self) -> np.ndarray:
        """Lower Cholesky factor, computed on first use."""
        if self._chol is None:
            factor = cholesky(self._matrix)
            factor.setflags(write=False)
            self._chol = factor
        return self._chol

    def __repr__(self) -> str:
        return f"SpdMatrix(dim={self.dim})"
