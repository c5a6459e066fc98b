"""Covariance estimation from linearly correlated Gaussian samples.

Estimators for the correlated sample covariance (a compound Wishart
matrix), exact evaluators for its non-asymptotic error bounds, and a
reproducible Monte Carlo experiment harness with CSV/SVG/JSON output.
"""

from .bounds import (
    BoundInputs,
    BoundReport,
    build_report,
    concentration_expectation,
    concentration_tail,
    delta_for_probability,
    estimation_expectation,
    estimation_tail,
    inputs_from_model,
    paulin_expectation,
    soloveychik_expectation,
)
from .errors import (
    CapExceeded,
    ConvergenceFailure,
    CorrcovError,
    DimensionMismatch,
    InvalidInputs,
    NoAnalyticForm,
    NotPositiveDefinite,
    OracleSizeExceeded,
)
from .estimator import (
    CovEstimate,
    compound_wishart,
    relative_frobenius_error,
    sample_covariance,
    spectral_error,
)
from .experiments import (
    ExperimentConfig,
    ExperimentResult,
    bound_violations,
    min_sample_size_trial,
    ols_fit,
    run_log_error_experiment,
    run_min_sample_experiment,
)
from .linalg import SpdMatrix, cholesky, eig_oracle, frobenius_norm, spectral_norm, trace
from .sampling import Prng, SampleBatch, correlate, sample_x, split
from .shape_models import (
    AllOnesModel,
    AnalyticNorms,
    IdentityModel,
    ModelFamily,
    RandomDiagonalModel,
    ShapeModel,
    ToeplitzModel,
    parse_model,
)

__version__ = "0.1.0"
