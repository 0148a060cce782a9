"""Covariance matrix estimation from incomplete high-dimensional data.

Pairwise-complete ("generalized") sample moments, blockwise tridiagonal /
tapering / banding estimators for bandable matrices, adaptive thresholding
for sparse matrices, cross-validated tuning and a simulation harness.
"""

from .bandable import (
    BlockPartition,
    CovEstimate,
    banding,
    block_partition,
    blockwise_tridiagonal,
    oracle_bandwidth,
    tapering,
)
from .bullet import bullet_at, bullet_bt, bullet_covariance, observed_fractions
from .cv import CvPlan, CvResult, cv_select, grid_bandable, grid_sparse
from .errors import ConvergenceError, DataError, MissCovError, NumericError, UndefinedMeanError
from .estimators import EstimatorOptions, fit
from .linalg import frobenius_norm, min_eigenvalue, op_l1_norm, spectral_norm, submatrix
from .losses import RiskReport, aggregate, loss
from .masked import (
    GeneralizedMoments,
    MaskedMatrix,
    PairwiseCounts,
    build_masked,
    generalized_covariance,
    generalized_mean,
    generalized_moments,
    pairwise_counts,
    theta_hat,
)
from .models import (
    MissingMechanism,
    SamplerSpec,
    apply_missingness,
    effective_sample_sizes,
    gaussian_theta,
    model_linear_decay,
    model_permutation_bandable,
    model_randomly_sparse,
    model_squared_decay,
    sample_gaussian,
)
from .sparse import (
    SupportSet,
    ThresholdRule,
    adaptive_threshold_estimate,
    apply_threshold,
    mcc,
    pd_correct,
    recovery_condition_holds,
    support,
)

__version__ = "0.1.0"
