"""Inverse-probability-weighted baseline covariance ("bullet" estimators).

The baseline zero-fills missing cells and rescales the raw cross products by
observation rates. Two forms are provided:

* rate-adjusted (default): per-variable observed fractions ``rho_hat`` and
  centering by the generalized mean;
* uniform (``rho`` given): a single known observation probability, no
  centering, as used for uniformly-missing simulations with mean zero.

``strict=True`` reproduces the rate-adjusted formula with ``1 - rho_hat`` in
the denominators instead of ``rho_hat``. That form divides by zero under full
observation and is only there for auditing.
"""

from __future__ import annotations

import numpy as np
from numpy.typing import NDArray

from .bandable import CovEstimate, blockwise_tridiagonal
from .errors import DataError, UndefinedMeanError
from .masked import (
    GeneralizedMoments,
    MaskedMatrix,
    PairwiseCounts,
    generalized_mean,
    generalized_moments,
    pairwise_counts,
)
from .sparse import ThresholdRule, adaptive_threshold_estimate

__all__ = ["observed_fractions", "bullet_covariance", "bullet_bt", "bullet_at"]


def observed_fractions(M: MaskedMatrix) -> NDArray[np.float64]:
    return M.mask.mean(axis=1)


def bullet_covariance(
    M: MaskedMatrix, *, rho: float | None = None, strict: bool = False
) -> NDArray[np.float64]:
    n = M.n
    if rho is not None:
        if not 0.0 < rho <= 1.0:
            raise DataError(f"observation probability must lie in (0, 1], got {rho}")
        if strict:
            raise DataError("strict mode applies to the rate-adjusted form only")
        A = M.values * M.mask
        cov = (A @ A.T) / (n * rho * rho)
        np.fill_diagonal(cov, np.sum(A * A, axis=1) / (n * rho))
        return np.triu(cov) + np.triu(cov, 1).T

    rho_hat = observed_fractions(M)
    bad = np.flatnonzero(rho_hat == 0.0)
    if bad.size:
        raise UndefinedMeanError(bad.tolist())
    mean = generalized_mean(M)
    A = (M.values - mean[:, None]) * M.mask
    w = 1.0 - rho_hat if strict else rho_hat
    if strict and np.any(w == 0.0):
        full = np.flatnonzero(w == 0.0).tolist()
        raise DataError(f"strict bullet formula divides by zero for fully observed variable(s) {full}")
    cov = (A @ A.T) / (n * np.outer(w, w))
    np.fill_diagonal(cov, np.sum(A * A, axis=1) / (n * w))
    return np.triu(cov) + np.triu(cov, 1).T


def bullet_bt(
    M: MaskedMatrix, k: int, *, rho: float | None = None, strict: bool = False
) -> CovEstimate:
    est = blockwise_tridiagonal(bullet_covariance(M, rho=rho, strict=strict), k, method="bt-bullet")
    return CovEstimate(est.matrix, est.method, est.tuning, pairwise_counts(M).n_min)


def bullet_at(
    M: MaskedMatrix,
    delta: float,
    rule: ThresholdRule | None = None,
    *,
    rho: float | None = None,
    strict: bool = False,
    moments: GeneralizedMoments | None = None,
    counts: PairwiseCounts | None = None,
    threshold_diagonal: bool = False,
) -> CovEstimate:
    """Adaptive thresholding of the bullet covariance.

    Threshold levels reuse theta and the pairwise counts of the generalized
    moments, so the two estimators differ only in the matrix thresholded.
    """
    counts = counts or pairwise_counts(M)
    if moments is None or moments.theta is None:
        moments = generalized_moments(M, counts)
    base = bullet_covariance(M, rho=rho, strict=strict)
    return adaptive_threshold_estimate(
        moments,
        counts,
        delta,
        rule,
        base=base,
        threshold_diagonal=threshold_diagonal,
        method="at-bullet",
    )
