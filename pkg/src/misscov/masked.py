"""Masked data and the generalized (pairwise-complete) sample moments.

Data are stored in the p x n orientation: one row per variable, one column
per sample. ``mask[i, k] == 1`` means variable ``i`` was observed in sample
``k``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import DataError, UndefinedMeanError

__all__ = [
    "MaskedMatrix",
    "PairwiseCounts",
    "GeneralizedMoments",
    "build_masked",
    "pairwise_counts",
    "generalized_mean",
    "generalized_covariance",
    "theta_hat",
    "generalized_moments",
]

# rows per chunk when forming the p x p x n products for theta
_THETA_CHUNK_ELEMS = 4_000_000


def _readonly(a: NDArray) -> NDArray:
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class MaskedMatrix:
    """Incomplete p x n sample with its observation indicator.

    Masked-out cells of ``values`` are normalized to 0 at construction, so the
    stored values can be multiplied by the mask without branching.
    """

    values: NDArray[np.float64]
    mask: NDArray[np.float64]

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=np.float64)
        mask_in = np.asarray(self.mask)
        if values.ndim != 2:
            raise DataError(f"values must be 2-D (p x n), got shape {values.shape}")
        if mask_in.shape != values.shape:
            raise DataError(
                f"mask shape {mask_in.shape} does not match values shape {values.shape}"
            )
        if mask_in.dtype == bool:
            mask = mask_in.astype(np.float64)
        else:
            mask = np.array(mask_in, dtype=np.float64)
            if not np.all((mask == 0.0) | (mask == 1.0)):
                raise DataError("mask entries must be exactly 0 or 1")
        p, n = values.shape
        if p < 1:
            raise DataError("need at least one variable (p >= 1)")
        if n < 2:
            raise DataError(f"need at least two samples (n >= 2), got n={n}")
        observed = mask == 1.0
        if not np.all(np.isfinite(values[observed])):
            raise DataError("observed values must be finite")
        values[~observed] = 0.0
        object.__setattr__(self, "values", _readonly(values))
        object.__setattr__(self, "mask", _readonly(mask))

    @property
    def p(self) -> int:
        return self.values.shape[0]

    @property
    def n(self) -> int:
        return self.values.shape[1]

    @classmethod
    def from_nan(cls, data: ArrayLike) -> MaskedMatrix:
        """Build from a p x n array where NaN marks a missing cell."""
        arr = np.asarray(data, dtype=np.float64)
        return cls(np.nan_to_num(arr, nan=0.0), ~np.isnan(arr))

    def value(self, i: int, k: int) -> float:
        if self.mask[i, k] != 1.0:
            raise DataError(f"cell ({i}, {k}) is not observed")
        return float(self.values[i, k])

    def to_nan(self) -> NDArray[np.float64]:
        out = self.values.copy()
        out[self.mask == 0.0] = np.nan
        return out

    def select_samples(self, idx: ArrayLike) -> MaskedMatrix:
        idx = np.asarray(idx)
        return MaskedMatrix(self.values[:, idx], self.mask[:, idx])


def build_masked(values: ArrayLike, mask: ArrayLike) -> MaskedMatrix:
    return MaskedMatrix(np.asarray(values, dtype=np.float64), np.asarray(mask))


@dataclass(frozen=True, eq=False)
class PairwiseCounts:
    """Co-observation counts ``counts[i, j] = sum_k S_ik S_jk``."""

    counts: NDArray[np.int64]

    @property
    def single(self) -> NDArray[np.int64]:
        """Per-variable observation counts (the diagonal)."""
        return np.diag(self.counts).copy()

    @property
    def n_min(self) -> int:
        return int(self.counts.min())

    def unobserved_variables(self) -> list[int]:
        return [int(i) for i in np.flatnonzero(np.diag(self.counts) == 0)]


def pairwise_counts(M: MaskedMatrix) -> PairwiseCounts:
    # mask is 0/1 float, so the product is exact for any realistic n
    c = np.rint(M.mask @ M.mask.T).astype(np.int64)
    return PairwiseCounts(_readonly(c))


@dataclass(frozen=True, eq=False)
class GeneralizedMoments:
    """Generalized mean, covariance and (optionally) entry variances theta.

    ``cov`` is symmetric but need not be positive semi-definite.
    ``missing_pairs`` lists the (i, j), i <= j, with no co-observed sample;
    those entries of ``cov`` and ``theta`` are set to 0.
    """

    mean: NDArray[np.float64]
    cov: NDArray[np.float64]
    theta: NDArray[np.float64] | None = None
    missing_pairs: tuple[tuple[int, int], ...] = field(default=())

    @property
    def p(self) -> int:
        return self.cov.shape[0]


def generalized_mean(M: MaskedMatrix) -> NDArray[np.float64]:
    n_i = M.mask.sum(axis=1)
    bad = np.flatnonzero(n_i == 0)
    if bad.size:
        raise UndefinedMeanError(bad.tolist())
    return (M.values * M.mask).sum(axis=1) / n_i


def _centered(M: MaskedMatrix, mean: NDArray[np.float64]) -> NDArray[np.float64]:
    # (X_ik - xbar_i) S_ik: zero on unobserved cells
    return (M.values - mean[:, None]) * M.mask


def _missing_pairs(counts: NDArray[np.int64]) -> tuple[tuple[int, int], ...]:
    ii, jj = np.nonzero(np.triu(counts == 0))
    return tuple((int(i), int(j)) for i, j in zip(ii, jj))


def generalized_covariance(
    M: MaskedMatrix, counts: PairwiseCounts | None = None
) -> GeneralizedMoments:
    """Pairwise-complete covariance with divisor ``n*_ij``.

    With a full mask this is the ordinary sample covariance with divisor n.
    """
    mean = generalized_mean(M)
    c = (counts or pairwise_counts(M)).counts
    A = _centered(M, mean)
    cov = (A @ A.T) / np.maximum(c, 1)
    cov[c == 0] = 0.0
    # exact symmetry regardless of BLAS summation order
    cov = np.triu(cov) + np.triu(cov, 1).T
    return GeneralizedMoments(mean=mean, cov=cov, missing_pairs=_missing_pairs(c))


def theta_hat(
    M: MaskedMatrix, moments: GeneralizedMoments, counts: PairwiseCounts | None = None
) -> NDArray[np.float64]:
    """Estimated variance of each centered product ``(X_i - mu_i)(X_j - mu_j)``.

    Computed from the defining sum (no moment expansion), so entries are
    non-negative by construction.
    """
    c = (counts or pairwise_counts(M)).counts
    A = _centered(M, moments.mean)
    S = M.mask
    p, n = A.shape
    theta = np.zeros((p, p))
    rows = max(1, _THETA_CHUNK_ELEMS // max(1, p * n))
    for start in range(0, p, rows):
        stop = min(p, start + rows)
        prod = A[start:stop, None, :] * A[None, :, :]
        dev = prod - moments.cov[start:stop, :, None]
        dev *= S[start:stop, None, :] * S[None, :, :]
        theta[start:stop] = np.einsum("ijk,ijk->ij", dev, dev)
    theta /= np.maximum(c, 1)
    theta[c == 0] = 0.0
    return np.triu(theta) + np.triu(theta, 1).T


def generalized_moments(
    M: MaskedMatrix, counts: PairwiseCounts | None = None, *, with_theta: bool = True
) -> GeneralizedMoments:
    """Mean, covariance and theta in one pass over the counts."""
    counts = counts or pairwise_counts(M)
    mom = generalized_covariance(M, counts)
    if not with_theta:
        return mom
    theta = theta_hat(M, mom, counts)
    return GeneralizedMoments(mom.mean, mom.cov, theta, mom.missing_pairs)
