"""Bandable covariance estimators: blockwise tridiagonal, tapering, banding.

All three act on a precomputed covariance-type matrix (the generalized sample
covariance, or any substitute such as the bullet covariance), so the same
code serves every baseline.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import DataError
from .linalg import check_symmetric

__all__ = [
    "CovEstimate",
    "BlockPartition",
    "block_partition",
    "blockwise_tridiagonal",
    "tapering",
    "banding",
    "tapering_weights",
    "banding_weights",
    "oracle_bandwidth",
]


@dataclass(frozen=True, eq=False)
class CovEstimate:
    """A symmetric covariance estimate and how it was produced."""

    matrix: NDArray[np.float64]
    method: str
    tuning: float | int | None = None
    n_min: int | None = None

    @property
    def p(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class BlockPartition:
    p: int
    k: int
    blocks: tuple[range, ...]

    @property
    def n_blocks(self) -> int:
        return len(self.blocks)

    def labels(self) -> NDArray[np.intp]:
        """Block index of every coordinate (0-based)."""
        return np.arange(self.p) // self.k


def _check_k(p: int, k: int) -> None:
    if not 1 <= k <= p:
        raise DataError(f"bandwidth k must satisfy 1 <= k <= p={p}, got {k}")


def block_partition(p: int, k: int) -> BlockPartition:
    """Consecutive blocks of size ``k``; the last block holds the remainder."""
    _check_k(p, k)
    n_blocks = math.ceil(p / k)
    blocks = tuple(range(j * k, min((j + 1) * k, p)) for j in range(n_blocks))
    return BlockPartition(p, k, blocks)


def _distances(p: int) -> NDArray[np.intp]:
    idx = np.arange(p)
    return np.abs(idx[:, None] - idx[None, :])


def blockwise_tridiagonal(sigma_star: ArrayLike, k: int, *, method: str = "bt") -> CovEstimate:
    """Keep ``k x k`` blocks ``(j, j')`` with ``|j - j'| <= 1``, zero the rest."""
    s = check_symmetric(sigma_star)
    p = s.shape[0]
    labels = block_partition(p, k).labels()
    keep = np.abs(labels[:, None] - labels[None, :]) <= 1
    return CovEstimate(np.where(keep, s, 0.0), method, int(k))


def tapering_weights(p: int, k: int) -> NDArray[np.float64]:
    """Weights 1 up to ``k/2``, linear down to 0 at ``k``. ``k`` must be even."""
    _check_k(p, k)
    if k % 2:
        lo = k - 1 if k > 1 else 2
        raise DataError(f"tapering needs an even k, got {k} (try k={lo} or k={k + 1})")
    half = k // 2
    d = _distances(p).astype(np.float64)
    return np.clip(2.0 - d / half, 0.0, 1.0)


def banding_weights(p: int, k: int) -> NDArray[np.float64]:
    _check_k(p, k)
    return (_distances(p) <= k).astype(np.float64)


def tapering(sigma_star: ArrayLike, k: int, *, method: str = "tp") -> CovEstimate:
    s = check_symmetric(sigma_star)
    return CovEstimate(tapering_weights(s.shape[0], k) * s, method, int(k))


def banding(sigma_star: ArrayLike, k: int, *, method: str = "bd") -> CovEstimate:
    s = check_symmetric(sigma_star)
    return CovEstimate(banding_weights(s.shape[0], k) * s, method, int(k))


def oracle_bandwidth(n_min: int, alpha: float) -> int:
    """Rate-optimal block size ``round(n_min ** (1 / (2 alpha + 1)))``, at least 1.

    Rounds half up. Callers clamp to ``p`` themselves.
    """
    if n_min < 1:
        raise DataError(f"n_min must be >= 1, got {n_min}")
    if not alpha > 0:
        raise DataError(f"alpha must be positive, got {alpha}")
    if math.isinf(alpha):
        return 1
    k = math.floor(n_min ** (1.0 / (2.0 * alpha + 1.0)) + 0.5)
    return max(1, k)
