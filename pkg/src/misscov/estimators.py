"""One entry point for every estimator, keyed by method tag.

Method tags: ``bt``, ``tp``, ``bd`` (bandable, tuned by block size k),
``at``, ``at+`` (sparse, tuned by delta), and the baselines ``bt-bullet``,
``at-bullet``.
"""

from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from .bandable import CovEstimate, banding, blockwise_tridiagonal, tapering
from .bullet import bullet_covariance
from .errors import DataError
from .masked import MaskedMatrix, generalized_moments, pairwise_counts
from .sparse import ThresholdRule, adaptive_threshold_estimate, pd_correct

__all__ = [
    "METHODS",
    "BANDABLE_METHODS",
    "SPARSE_METHODS",
    "EstimatorOptions",
    "normalize_method",
    "prepare",
    "fit",
]

BANDABLE_METHODS = ("bt", "tp", "bd", "bt-bullet")
SPARSE_METHODS = ("at", "at+", "at-bullet")
METHODS = BANDABLE_METHODS + SPARSE_METHODS

_ALIASES = {"bt•": "bt-bullet", "at•": "at-bullet", "btb": "bt-bullet", "atb": "at-bullet"}


def normalize_method(name: str) -> str:
    m = _ALIASES.get(name.strip().lower(), name.strip().lower())
    if m not in METHODS:
        raise ValueError(f"unknown method {name!r}; expected one of {', '.join(METHODS)}")
    return m


@dataclass(frozen=True)
class EstimatorOptions:
    """Settings shared by all methods.

    ``bullet_rho`` switches the bullet baseline to its known-rate form;
    ``strict_bullet`` selects the printed ``1 - rho`` normalization.
    """

    rule: ThresholdRule = ThresholdRule("soft")
    threshold_diagonal: bool = False
    bullet_rho: float | None = None
    strict_bullet: bool = False


def prepare(
    M: MaskedMatrix, method: str, options: EstimatorOptions | None = None
) -> Callable[[float], CovEstimate]:
    """Do the tuning-independent work once; return ``t -> estimate``."""
    method = normalize_method(method)
    opts = options or EstimatorOptions()
    counts = pairwise_counts(M)
    need_theta = method in SPARSE_METHODS
    moments = generalized_moments(M, counts, with_theta=need_theta)
    n_min = counts.n_min

    if method in BANDABLE_METHODS:
        if method == "bt-bullet":
            base = bullet_covariance(M, rho=opts.bullet_rho, strict=opts.strict_bullet)
        else:
            base = moments.cov
        band = {"bt": blockwise_tridiagonal, "bt-bullet": blockwise_tridiagonal,
                "tp": tapering, "bd": banding}[method]
        p = M.p

        def fit_band(t: float) -> CovEstimate:
            k = int(t)
            if k != t:
                raise DataError(f"block size must be an integer, got {t}")
            est = band(base, min(k, p), method=method)
            return CovEstimate(est.matrix, method, k, n_min)

        return fit_band

    base = None
    if method == "at-bullet":
        base = bullet_covariance(M, rho=opts.bullet_rho, strict=opts.strict_bullet)

    def fit_sparse(t: float) -> CovEstimate:
        est = adaptive_threshold_estimate(
            moments,
            counts,
            float(t),
            opts.rule,
            base=base,
            threshold_diagonal=opts.threshold_diagonal,
            method="at" if method == "at+" else method,
        )
        if method == "at+":
            est = pd_correct(est, counts)
        return est

    return fit_sparse


def fit(
    M: MaskedMatrix, method: str, t: float, options: EstimatorOptions | None = None
) -> CovEstimate:
    return prepare(M, method, options)(t)


def as_matrix(est: CovEstimate | NDArray[np.float64]) -> NDArray[np.float64]:
    return est.matrix if isinstance(est, CovEstimate) else np.asarray(est)
