"""Random-split cross-validation for the block size k or threshold constant delta."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from .errors import DataError
from .estimators import BANDABLE_METHODS, EstimatorOptions, normalize_method, prepare
from .masked import MaskedMatrix, generalized_covariance

__all__ = ["CvPlan", "CvResult", "grid_bandable", "grid_sparse", "default_grid", "cv_select"]

_SPLIT_RETRIES = 100


def grid_bandable(p: int, N: int) -> list[int]:
    """``{1, ceil(p^(1/N)), ..., ceil(p^(N/N))}`` without duplicates."""
    if p < 1 or N < 1:
        raise ValueError(f"need p >= 1 and N >= 1, got p={p}, N={N}")
    vals = {1, p}
    for j in range(1, N):
        # guard against p**(j/N) landing a hair above an integer
        x = p ** (j / N)
        r = round(x)
        vals.add(r if math.isclose(x, r, rel_tol=1e-12) else math.ceil(x))
    return sorted(vals)


def grid_sparse(N: int) -> list[float]:
    """``4N + 1`` equally spaced values from 0 to 4."""
    if N < 1:
        raise ValueError(f"need N >= 1, got {N}")
    return [j / N for j in range(4 * N + 1)]


def default_grid(method: str, p: int, N: int) -> list[float]:
    method = normalize_method(method)
    if method in BANDABLE_METHODS:
        return [float(k) for k in grid_bandable(p, N)]
    return grid_sparse(N)


@dataclass(frozen=True)
class CvPlan:
    K: int = 5
    H: int = 5
    N: int = 20
    grid: tuple[float, ...] | None = None
    seed: int = 0

    def __post_init__(self) -> None:
        if self.K < 2:
            raise ValueError(f"K must be at least 2, got {self.K}")
        if self.H < 1:
            raise ValueError(f"H must be at least 1, got {self.H}")
        if self.N < 1:
            raise ValueError(f"N must be at least 1, got {self.N}")
        if self.grid is not None:
            g = tuple(float(t) for t in self.grid)
            if not g:
                raise ValueError("grid must be nonempty")
            if any(b <= a for a, b in zip(g, g[1:])):
                raise ValueError("grid must be strictly increasing")
            object.__setattr__(self, "grid", g)


@dataclass(frozen=True)
class CvResult:
    t_star: float
    grid: tuple[float, ...]
    risks: tuple[float, ...]


def _split(
    M: MaskedMatrix, K: int, rng: np.random.Generator
) -> tuple[NDArray[np.intp], NDArray[np.intp]]:
    n = M.n
    n2 = max(1, round(n / K))
    if n2 < 2 or n - n2 < 2:
        raise DataError(f"n={n} is too small for {K}-fold splitting (each group needs >= 2 samples)")
    for _ in range(_SPLIT_RETRIES):
        perm = rng.permutation(n)
        valid, train = np.sort(perm[:n2]), np.sort(perm[n2:])
        # every variable must be observed in both groups for the means to exist
        if M.mask[:, valid].any(axis=1).all() and M.mask[:, train].any(axis=1).all():
            return train, valid
    raise DataError("could not find a split observing every variable in both groups")


def cv_select(
    M: MaskedMatrix,
    method: str,
    plan: CvPlan | None = None,
    options: EstimatorOptions | None = None,
) -> CvResult:
    """Pick the grid value minimizing the average squared Frobenius distance
    between the training-half estimate and the validation generalized
    covariance. Ties go to the smallest value.
    """
    plan = plan or CvPlan()
    method = normalize_method(method)
    if method == "at+":
        # the PD shift does not change which delta fits best; tune plain at
        method = "at"
    if M.n < plan.K:
        raise DataError(f"need n >= K, got n={M.n}, K={plan.K}")
    grid = plan.grid or tuple(default_grid(method, M.p, plan.N))
    rng = np.random.default_rng(plan.seed)
    risks = np.zeros(len(grid))
    for _ in range(plan.H):
        train, valid = _split(M, plan.K, rng)
        target = generalized_covariance(M.select_samples(valid)).cov
        fit_t = prepare(M.select_samples(train), method, options)
        for i, t in enumerate(grid):
            diff = fit_t(t).matrix - target
            risks[i] += float(np.sum(diff * diff))
    risks /= plan.H
    best = int(np.argmin(risks))
    return CvResult(grid[best], tuple(grid), tuple(float(r) for r in risks))
