"""Norms, extreme eigenvalues and submatrices of dense matrices.

Extreme eigen/singular values default to the LAPACK symmetric eigensolver.
``method="power"`` selects seeded power iteration instead; it is reproducible
but can hit its iteration cap when the extreme eigenvalue is nearly
degenerate, in which case ``ConvergenceError`` is raised.
"""

from __future__ import annotations

from collections.abc import Callable, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import ConvergenceError, DataError, NumericError

__all__ = [
    "DEFAULT_TOL",
    "DEFAULT_MAX_ITER",
    "check_symmetric",
    "spectral_norm",
    "op_l1_norm",
    "frobenius_norm",
    "submatrix",
    "min_eigenvalue",
    "max_eigenvalue",
]

DEFAULT_TOL = 1e-8
DEFAULT_MAX_ITER = 10_000


def _finite(A: ArrayLike, name: str = "matrix") -> NDArray[np.float64]:
    a = np.asarray(A, dtype=np.float64)
    if a.ndim == 1:
        a = a[None, :]
    if a.ndim != 2:
        raise DataError(f"{name} must be 2-D, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise NumericError(f"{name} has non-finite entries")
    return a


def check_symmetric(A: ArrayLike) -> NDArray[np.float64]:
    """Return ``A`` as a float array, raising unless it is exactly symmetric."""
    a = _finite(A)
    if a.shape[0] != a.shape[1]:
        raise DataError(f"expected a square matrix, got shape {a.shape}")
    if not np.array_equal(a, a.T):
        raise DataError(
            f"matrix is not symmetric (max |a_ij - a_ji| = {np.max(np.abs(a - a.T)):.3g})"
        )
    return a


def _check_tol(tol: float) -> None:
    if not (0.0 < tol <= 1e-2):
        raise ValueError(f"tol must lie in (0, 1e-2], got {tol}")


def _psd_top_eigenvalue(
    matvec: Callable[[NDArray], NDArray],
    dim: int,
    *,
    atol: float,
    max_iter: int,
    seed: int,
) -> float:
    """Largest eigenvalue of a symmetric PSD operator given only ``matvec``.

    Stops when either the residual ``||Bx - mu x||`` or an Aitken-style
    extrapolation of the remaining Rayleigh-quotient increase drops below
    ``atol``.
    """
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(dim)
    x /= np.linalg.norm(x)
    mu_prev = None
    step_prev = None
    for _ in range(max_iter):
        y = matvec(x)
        mu = float(x @ y)
        y_norm = float(np.linalg.norm(y))
        if y_norm == 0.0:
            return 0.0
        resid = float(np.linalg.norm(y - mu * x))
        if resid <= atol:
            return mu
        if mu_prev is not None:
            step = abs(mu - mu_prev)
            if step <= 4 * np.finfo(float).eps * max(abs(mu), 1.0):
                return mu
            if step_prev is not None and step_prev > 0.0:
                q = step / step_prev
                if q < 1.0 and step * q / (1.0 - q) <= atol:
                    return mu
            step_prev = step
        mu_prev = mu
        x = y / y_norm
    raise ConvergenceError(
        f"power iteration did not converge in {max_iter} iterations (dim={dim})"
    )


def _check_method(method: str) -> None:
    if method not in ("eigh", "power"):
        raise ValueError(f"method must be 'eigh' or 'power', got {method!r}")


def spectral_norm(
    A: ArrayLike,
    tol: float = DEFAULT_TOL,
    *,
    method: str = "eigh",
    max_iter: int = DEFAULT_MAX_ITER,
    seed: int = 0,
) -> float:
    """Largest singular value of ``A`` to relative accuracy ``tol``.

    For symmetric ``A`` this is the largest absolute eigenvalue. The power
    route iterates on ``A^T A``.
    """
    _check_tol(tol)
    _check_method(method)
    a = _finite(A)
    if not a.any():
        return 0.0
    if method == "eigh":
        if a.shape[0] == a.shape[1] and np.array_equal(a, a.T):
            return float(np.max(np.abs(np.linalg.eigvalsh(a))))
        gram = a.T @ a if a.shape[0] >= a.shape[1] else a @ a.T
        return float(np.sqrt(max(np.linalg.eigvalsh(gram)[-1], 0.0)))
    # the top of A^T A lies in [||A||_F^2 / rank, ||A||_F^2]
    scale = float(np.sum(a * a)) / min(a.shape)
    mu = _psd_top_eigenvalue(
        lambda v: a.T @ (a @ v),
        a.shape[1],
        atol=tol * scale,
        max_iter=max_iter,
        seed=seed,
    )
    return float(np.sqrt(max(mu, 0.0)))


def op_l1_norm(A: ArrayLike) -> float:
    """Maximum absolute column sum."""
    a = _finite(A)
    if a.size == 0:
        return 0.0
    return float(np.abs(a).sum(axis=0).max())


def frobenius_norm(A: ArrayLike) -> float:
    a = _finite(A)
    return float(np.sqrt(np.sum(a * a)))


def submatrix(A: ArrayLike, rows: Sequence[int], cols: Sequence[int]) -> NDArray[np.float64]:
    """``(a_ij)`` for ``i`` in ``rows``, ``j`` in ``cols``, in the given order."""
    a = np.asarray(A, dtype=np.float64)
    r = np.asarray(list(rows), dtype=np.intp)
    c = np.asarray(list(cols), dtype=np.intp)
    for idx, size, label in ((r, a.shape[0], "row"), (c, a.shape[1], "column")):
        if idx.size and (idx.min() < 0 or idx.max() >= size):
            raise IndexError(f"{label} index out of range for dimension {size}")
    return a[np.ix_(r, c)]


def _shifted_extreme(a: NDArray, sign: float, tol: float, max_iter: int, seed: int) -> float:
    # B = s I - sign * A is PSD for s >= rho(A); top(B) = s - sign * extreme(A)
    s = op_l1_norm(a)
    if s == 0.0:
        return 0.0
    top = _psd_top_eigenvalue(
        lambda v: s * v - sign * (a @ v),
        a.shape[0],
        atol=tol * s,
        max_iter=max_iter,
        seed=seed,
    )
    return sign * (s - top)


def min_eigenvalue(
    A: ArrayLike,
    tol: float = DEFAULT_TOL,
    *,
    method: str = "eigh",
    max_iter: int = DEFAULT_MAX_ITER,
    seed: int = 0,
) -> float:
    """Smallest eigenvalue of a symmetric matrix, within ``tol * ||A||_l1``."""
    _check_tol(tol)
    _check_method(method)
    a = check_symmetric(A)
    if method == "eigh":
        return float(np.linalg.eigvalsh(a)[0])
    return _shifted_extreme(a, 1.0, tol, max_iter, seed)


def max_eigenvalue(
    A: ArrayLike,
    tol: float = DEFAULT_TOL,
    *,
    method: str = "eigh",
    max_iter: int = DEFAULT_MAX_ITER,
    seed: int = 0,
) -> float:
    _check_tol(tol)
    _check_method(method)
    a = check_symmetric(A)
    if method == "eigh":
        return float(np.linalg.eigvalsh(a)[-1])
    return _shifted_extreme(a, -1.0, tol, max_iter, seed)
