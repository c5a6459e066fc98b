"""Correlation models for linearly mixed Gaussian sample batches.

Each model fixes an m x m mixing matrix Lambda applied on the sample
index (y = x @ Lambda); the induced inter-sample structure is
B = Lambda @ Lambda.T.  Four families:

``identity``
    Independent samples, B = I.
``toeplitz:<theta>``
    Geometrically decaying correlation, B[i, j] = theta^|i-j| with
    0 < theta < 1.  Lambda is the (closed-form) lower Cholesky factor.
``all_ones``
    Totally correlated samples: every column of y is the same average
    (1/sqrt(m)) * sum of the x columns, so every entry of B is 1.
``random_diag:<mu>,<sigma>``
    Independent samples with random scale factors: Lambda = diag(rho)
    with rho_i ~ N(mu, sigma^2) drawn once from the model's own seed.

Models are immutable after construction.  ``mix`` applies Lambda through
the model's structure in O(n*m) instead of a dense O(n*m^2) product; it
agrees with ``x @ lam()`` to floating-point roundoff and is the path the
Monte Carlo experiments take.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import lfilter

from .errors import DimensionMismatch, InvalidInputs, NoAnalyticForm
from .linalg import as_dense
from .sampling import Prng


@dataclass(frozen=True)
class AnalyticNorms:
    """Closed-form norm values for a model's B matrix.

    ``frobenius_upper`` is exact for every kind that provides it (for the
    Toeplitz family it is the exact finite-m identity, not the relaxed
    m(1+theta^2)/(1-theta^2) simplification).  ``spectral_upper`` is exact
    except for the Toeplitz family, where it is the Gershgorin bound
    (1+theta)/(1-theta); ``exact`` is False in that case.
    """

    trace: float
    frobenius_upper: float
    spectral_upper: float
    exact: bool


class ShapeModel:
    """Base class: a fixed mixing matrix of size m."""

    kind = "abstract"

    def __init__(self, m: int):
        if m < 1:
            raise InvalidInputs("sample count m must be positive")
        self.m = int(m)

    def lam(self) -> np.ndarray:
        """Materialize the m x m mixing matrix Lambda."""
        raise NotImplementedError

    def b(self) -> np.ndarray:
        """Materialize B = Lambda @ Lambda.T directly."""
        raise NotImplementedError

    def analytic_norms(self) -> AnalyticNorms:
        raise NoAnalyticForm(f"model kind {self.kind!r} has no closed-form norms")

    def mix(self, x) -> np.ndarray:
        """Structure-aware evaluation of ``x @ lam()``."""
        x = self._check_cols(x)
        return x @ self.lam()

    def descriptor(self) -> str:
        raise NotImplementedError

    def _check_cols(self, x) -> np.ndarray:
        x = as_dense(x, "x")
        if x.shape[1] != self.m:
            raise DimensionMismatch(
                f"x has {x.shape[1]} columns but the model expects {self.m}"
            )
        return x

    def __repr__(self) -> str:
        return f"{type(self).__name__}(m={self.m})"


class IdentityModel(ShapeModel):
    kind = "identity"

    def lam(self) -> np.ndarray:
        return np.eye(self.m)

    def b(self) -> np.ndarray:
        return np.eye(self.m)

    def analytic_norms(self) -> AnalyticNorms:
        return AnalyticNorms(
            trace=float(self.m),
            frobenius_upper=float(np.sqrt(self.m)),
            spectral_upper=1.0,
            exact=True,
        )

    def mix(self, x) -> np.ndarray:
        return self._check_cols(x)

    def descriptor(self) -> str:
        return "identity"


class ToeplitzModel(ShapeModel):
    """B[i, j] = theta^|i-j|, the stationary AR(1) correlation matrix."""

    kind = "toeplitz"

    def __init__(self, theta: float, m: int):
        super().__init__(m)
        theta = float(theta)
        if not (0.0 < theta < 1.0):
            raise InvalidInputs(
                f"toeplitz theta must lie strictly inside (0, 1), got {theta}"
            )
        self.theta = theta

    def lam(self) -> np.ndarray:
        # Closed-form lower Cholesky factor of T(theta): column 0 holds
        # theta^i, column j >= 1 holds sqrt(1-theta^2) * theta^(i-j) for
        # i >= j.  Verified against the generic factorization in tests.
        i = np.arange(self.m)
        d = i[:, None] - i[None, :]
        lower = np.where(d >= 0, self.theta ** np.maximum(d, 0), 0.0)
        lower[:, 1:] *= np.sqrt(1.0 - self.theta * self.theta)
        return lower

    def b(self) -> np.ndarray:
        i = np.arange(self.m)
        return self.theta ** np.abs(i[:, None] - i[None, :]).astype(np.float64)

    def analytic_norms(self) -> AnalyticNorms:
        th2 = self.theta * self.theta
        fro2 = self.m * (1.0 + th2) / (1.0 - th2) + (
            2.0 * th2 * (th2**self.m - 1.0) / (1.0 - th2) ** 2
        )
        return AnalyticNorms(
            trace=float(self.m),
            frobenius_upper=float(np.sqrt(fro2)),
            spectral_upper=(1.0 + self.theta) / (1.0 - self.theta),
            exact=False,
        )

    def mix(self, x) -> np.ndarray:
        # x @ lam() column j is a backward geometric sum
        # s_j = x_j + theta * s_{j+1}; evaluate it as an IIR filter on the
        # reversed sample axis.
        x = self._check_cols(x)
        s = lfilter([1.0], [1.0, -self.theta], x[:, ::-1], axis=1)[:, ::-1]
        y = np.sqrt(1.0 - self.theta * self.theta) * s
        y[:, 0] = s[:, 0]
        return y

    def descriptor(self) -> str:
        return f"toeplitz:{self.theta!r}"

    def __repr__(self) -> str:
        return f"ToeplitzModel(theta={self.theta!r}, m={self.m})"


class AllOnesModel(ShapeModel):
    """Every sample is the same scaled average; B is the all-ones matrix."""

    kind = "all_ones"

    def lam(self) -> np.ndarray:
        return np.full((self.m, self.m), 1.0 / np.sqrt(self.m))

    def b(self) -> np.ndarray:
        return np.ones((self.m, self.m))

    def analytic_norms(self) -> AnalyticNorms:
        return AnalyticNorms(
            trace=float(self.m),
            frobenius_upper=float(self.m),
            spectral_upper=float(self.m),
            exact=True,
        )

    def mix(self, x) -> np.ndarray:
        x = self._check_cols(x)
        s = x.sum(axis=1) / np.sqrt(self.m)
        return np.repeat(s[:, None], self.m, axis=1)

    def descriptor(self) -> str:
        return "all_ones"


class RandomDiagonalModel(ShapeModel):
    """Diagonal mixing with scale factors rho_i ~ N(mu, sigma^2).

    The factors are drawn once at construction from the model's own seed
    and then fixed, so a given (mu, sigma, seed, m) is bit-reproducible.
    Experiment code redraws per trial by deriving a fresh seed from the
    trial's stream.
    """

    kind = "random_diag"

    def __init__(self, mu: float, sigma: float, seed: int, m: int):
        super().__init__(m)
        sigma = float(sigma)
        if sigma < 0.0:
            raise InvalidInputs(f"random_diag sigma must be nonnegative, got {sigma}")
        self.mu = float(mu)
        self.sigma = sigma
        self.seed = int(seed)
        rho = self.mu + self.sigma * Prng(self.seed).normal(self.m)
        rho.setflags(write=False)
        self.rho = rho

    def lam(self) -> np.ndarray:
        return np.diag(self.rho)

    def b(self) -> np.ndarray:
        return np.diag(self.rho * self.rho)

    def mix(self, x) -> np.ndarray:
        x = self._check_cols(x)
        return x * self.rho[None, :]

    def descriptor(self) -> str:
        return f"random_diag:{self.mu!r},{self.sigma!r}"

    def __repr__(self) -> str:
        return (
            f"RandomDiagonalModel(mu={self.mu!r}, sigma={self.sigma!r}, "
            f"seed={self.seed}, m={self.m})"
        )


@dataclass(frozen=True)
class ModelFamily:
    """A model descriptor with the sample count left open.

    Experiments instantiate the family at each probed m; the random
    diagonal family additionally needs a seed per instantiation.
    """

    kind: str
    theta: float | None = None
    mu: float | None = None
    sigma: float | None = None

    def instantiate(self, m: int, seed: int | None = None) -> ShapeModel:
        if self.kind == "identity":
            return IdentityModel(m)
        if self.kind == "toeplitz":
            return ToeplitzModel(self.theta, m)
        if self.kind == "all_ones":
            return AllOnesModel(m)
        if self.kind == "random_diag":
            if seed is None:
                raise InvalidInputs("random_diag instantiation requires a seed")
            return RandomDiagonalModel(self.mu, self.sigma, seed, m)
        raise InvalidInputs(f"unknown model kind {self.kind!r}")

    @property
    def needs_seed(self) -> bool:
        return self.kind == "random_diag"

    def label(self) -> str:
        if self.kind == "identity":
            return "identity"
        if self.kind == "toeplitz":
            return f"toeplitz:{self.theta!r}"
        if self.kind == "all_ones":
            return "all_ones"
        return f"random_diag:{self.mu!r},{self.sigma!r}"


def parse_model(text: str) -> ModelFamily:
    """Parse a model descriptor.

    Accepted forms: ``identity``, ``toeplitz:<theta>``, ``all_ones``,
    ``random_diag:<mu>,<sigma>``.
    """
    text = text.strip()
    name, _, arg = text.partition(":")
    name = name.strip()
    if name == "identity":
        if arg:
            raise InvalidInputs("identity takes no parameters")
        return ModelFamily(kind="identity")
    if name == "all_ones":
        if arg:
            raise InvalidInputs("all_ones takes no parameters")
        return ModelFamily(kind="all_ones")
    if name == "toeplitz":
        try:
            theta = float(arg)
        except ValueError:
            raise InvalidInputs(f"bad toeplitz parameter {arg!r}") from None
        if not (0.0 < theta < 1.0):
            raise InvalidInputs(
                f"toeplitz theta must lie strictly inside (0, 1), got {theta}"
            )
        return ModelFamily(kind="toeplitz", theta=theta)
    if name == "random_diag":
        parts = arg.split(",")
        if len(parts) != 2:
            raise InvalidInputs("random_diag expects two parameters: mu,sigma")
        try:
            mu, sigma = float(parts[0]), float(parts[1])
        except ValueError:
            raise InvalidInputs(f"bad random_diag parameters {arg!r}") from None
        if sigma < 0.0:
            raise InvalidInputs(f"random_diag sigma must be nonnegative, got {sigma}")
        return ModelFamily(kind="random_diag", mu=mu, sigma=sigma)
    raise InvalidInputs(f"unknown model descriptor {text!r}")
