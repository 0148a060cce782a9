"""Adaptive entrywise thresholding, support recovery and PD correction."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .bandable import CovEstimate
from .errors import DataError
from .linalg import check_symmetric, min_eigenvalue
from .masked import GeneralizedMoments, PairwiseCounts

__all__ = [
    "ThresholdRule",
    "SupportSet",
    "apply_threshold",
    "threshold_levels",
    "adaptive_threshold_estimate",
    "support",
    "pd_correct",
    "recovery_condition_holds",
    "mcc",
]

_KINDS = ("soft", "hard", "alasso")


@dataclass(frozen=True)
class ThresholdRule:
    """A thresholding function ``T_lambda``.

    ``kind`` is ``"soft"``, ``"hard"`` or ``"alasso"`` (adaptive lasso with
    exponent ``eta >= 1``). ``c_T`` is the smallest constant with
    ``|T(z)| <= c_T |y|`` whenever ``|z - y| <= lambda``: 1 for soft, ``eta``
    for adaptive lasso (the slope at ``|z| = lambda``) and ``None`` for hard,
    which has no such bound.
    """

    kind: str = "soft"
    eta: float = 1.0

    def __post_init__(self) -> None:
        if self.kind not in _KINDS:
            raise ValueError(f"unknown threshold rule {self.kind!r}; expected one of {_KINDS}")
        if self.kind == "alasso" and not self.eta >= 1.0:
            raise ValueError(f"adaptive lasso needs eta >= 1, got {self.eta}")

    @property
    def c_T(self) -> float | None:
        if self.kind == "hard":
            return None
        return self.eta if self.kind == "alasso" else 1.0

    @classmethod
    def parse(cls, text: str) -> ThresholdRule:
        """Parse ``soft``, ``hard`` or ``alasso:<eta>``."""
        name, _, arg = text.strip().lower().partition(":")
        if name in ("alasso", "adaptive-lasso"):
            try:
                return cls("alasso", float(arg) if arg else 1.0)
            except ValueError as exc:
                raise ValueError(f"bad adaptive lasso exponent in {text!r}") from exc
        if arg:
            raise ValueError(f"rule {name!r} takes no parameter")
        return cls(name)

    def __str__(self) -> str:
        return f"alasso:{self.eta:g}" if self.kind == "alasso" else self.kind

    def __call__(self, z: ArrayLike, lam: ArrayLike) -> NDArray[np.float64]:
        z = np.asarray(z, dtype=np.float64)
        lam = np.asarray(lam, dtype=np.float64)
        if np.any(lam < 0):
            raise ValueError("threshold level must be non-negative")
        az = np.abs(z)
        keep = az > lam
        if self.kind == "hard":
            return np.where(keep, z, 0.0)
        if self.kind == "soft":
            cut = lam
        else:
            # z (1 - (lam/|z|)^eta) = z - sgn(z) lam (lam/|z|)^(eta-1)
            with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
                cut = np.minimum(lam * (lam / az) ** (self.eta - 1.0), lam)
        mag = _sub_round_up(az, np.broadcast_to(cut, az.shape))
        return np.where(keep, np.sign(z) * mag, 0.0)


def _sub_round_up(a: NDArray[np.float64], b: NDArray[np.float64]) -> NDArray[np.float64]:
    """``a - b`` for ``a >= b >= 0``, rounded so it never falls below the exact value.

    Keeps ``|T(z) - z| <= lambda`` exact in floating point.
    """
    s = a - b
    # Fast2Sum residual: a - b == s + t exactly when |a| >= |b|
    t = -b - (s - a)
    return np.where(t > 0, np.nextafter(s, np.inf), s)


def apply_threshold(rule: ThresholdRule, z: float, lam: float) -> float:
    if lam < 0:
        raise ValueError(f"threshold level must be non-negative, got {lam}")
    return float(rule(z, lam))


def threshold_levels(
    theta: NDArray[np.float64], counts: PairwiseCounts, delta: float
) -> NDArray[np.float64]:
    """``delta * sqrt(theta_ij * ln p / n_ij)``; 0 where ``n_ij == 0``."""
    c = counts.counts
    p = theta.shape[0]
    lam = delta * np.sqrt(theta * math.log(p) / np.maximum(c, 1))
    lam[c == 0] = 0.0
    return lam


def adaptive_threshold_estimate(
    moments: GeneralizedMoments,
    counts: PairwiseCounts,
    delta: float,
    rule: ThresholdRule | None = None,
    *,
    base: ArrayLike | None = None,
    threshold_diagonal: bool = False,
    method: str = "at",
) -> CovEstimate:
    """Threshold each entry of the covariance at its own noise level.

    ``base`` replaces ``moments.cov`` as the matrix being thresholded (the
    levels still come from ``moments``); the bullet baseline uses this.
    Diagonal entries pass through untouched unless ``threshold_diagonal``.
    """
    if moments.theta is None:
        raise DataError("theta is required; compute moments with with_theta=True")
    # delta = 0 (no thresholding) is the first point of the CV grid
    if not delta >= 0:
        raise DataError(f"delta must be non-negative, got {delta}")
    rule = rule or ThresholdRule()
    s = check_symmetric(moments.cov if base is None else base)
    lam = threshold_levels(moments.theta, counts, delta)
    out = rule(s, lam)
    if not threshold_diagonal:
        np.fill_diagonal(out, np.diag(s))
    out[counts.counts == 0] = 0.0
    return CovEstimate(out, method, float(delta), counts.n_min)


@dataclass(frozen=True)
class SupportSet:
    """Nonzero pattern of a symmetric matrix.

    ``edges`` holds off-diagonal pairs as ``(i, j)`` with ``i < j``;
    membership tests accept either order.
    """

    p: int
    edges: frozenset[tuple[int, int]]
    diagonal: frozenset[int]

    def __contains__(self, pair: object) -> bool:
        i, j = pair  # type: ignore[misc]
        if i == j:
            return i in self.diagonal
        return (min(i, j), max(i, j)) in self.edges

    def __len__(self) -> int:
        return len(self.edges)

    def pairs(self) -> list[tuple[int, int]]:
        """All ordered off-diagonal pairs, both orientations."""
        return sorted(self.edges | {(j, i) for i, j in self.edges})

    def indicator(self) -> NDArray[np.bool_]:
        """Upper-triangle presence vector over the ``p(p-1)/2`` cells."""
        m = np.zeros((self.p, self.p), dtype=bool)
        for i, j in self.edges:
            m[i, j] = True
        return m[np.triu_indices(self.p, 1)]

    def degrees(self) -> NDArray[np.int64]:
        deg = np.zeros(self.p, dtype=np.int64)
        for i, j in self.edges:
            deg[i] += 1
            deg[j] += 1
        return deg


def support(A: ArrayLike) -> SupportSet:
    a = check_symmetric(A)
    ii, jj = np.nonzero(np.triu(a != 0.0, 1))
    edges = frozenset((int(i), int(j)) for i, j in zip(ii, jj))
    diag = frozenset(int(i) for i in np.flatnonzero(np.diag(a)))
    return SupportSet(a.shape[0], edges, diag)


def pd_correct(est: CovEstimate, counts: PairwiseCounts, *, tol: float = 1e-10) -> CovEstimate:
    """Shift the diagonal so the minimum eigenvalue is at least ``ln p / n_min``.

    Returned unchanged when the estimate is already positive semi-definite.
    """
    s = check_symmetric(est.matrix)
    p = s.shape[0]
    n_min = counts.n_min
    if n_min < 1:
        raise DataError("pd correction needs every pair co-observed at least once")
    lam_min = min_eigenvalue(s, tol)
    method = est.method if est.method.endswith("+") else est.method + "+"
    if lam_min >= 0.0:
        return CovEstimate(s.copy(), method, est.tuning, est.n_min)
    shift = abs(lam_min) + math.log(p) / n_min
    return CovEstimate(s + shift * np.eye(p), method, est.tuning, est.n_min)


def recovery_condition_holds(
    sigma: ArrayLike,
    theta: ArrayLike,
    counts: PairwiseCounts,
    gamma: float,
) -> NDArray[np.bool_]:
    """Per-entry check of ``|sigma_ij| > (4 + gamma) sqrt(theta_ij ln p / n_ij)``.

    Zero entries are not in the support and report True (nothing to recover).
    The inequality is strict; a pair never co-observed fails.
    """
    s = np.asarray(sigma, dtype=np.float64)
    th = np.asarray(theta, dtype=np.float64)
    c = counts.counts
    p = s.shape[0]
    with np.errstate(divide="ignore"):
        bound = (4.0 + gamma) * np.sqrt(th * math.log(p) / c)
    ok = np.abs(s) > bound
    ok[c == 0] = False
    return np.where(s == 0.0, True, ok)


def mcc(a: SupportSet, b: SupportSet, p: int | None = None) -> float:
    """Matthews correlation between two supports over the off-diagonal cells.

    Returns 0 when any marginal count is zero.
    """
    p = p if p is not None else a.p
    if a.p != p or b.p != p:
        raise DataError(f"supports have dimensions {a.p} and {b.p}, expected {p}")
    x = a.indicator()
    y = b.indicator()
    tp = float(np.sum(x & y))
    tn = float(np.sum(~x & ~y))
    fp = float(np.sum(~x & y))
    fn = float(np.sum(x & ~y))
    denom = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn)
    if denom == 0.0:
        return 0.0
    return (tp * tn - fp * fn) / math.sqrt(denom)
