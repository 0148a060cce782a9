"""Ground-truth covariance models, Gaussian sampling and missingness masks."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import DataError
from .masked import MaskedMatrix, PairwiseCounts

__all__ = [
    "MODEL_KINDS",
    "model_linear_decay",
    "model_squared_decay",
    "model_permutation_bandable",
    "model_randomly_sparse",
    "make_model",
    "gaussian_theta",
    "psd_sqrt",
    "SamplerSpec",
    "sample_gaussian",
    "MissingMechanism",
    "apply_missingness",
    "effective_sample_sizes",
]

MODEL_KINDS = ("linear-decay", "squared-decay", "permutation-bandable", "randomly-sparse")


def _lags(p: int) -> NDArray[np.float64]:
    idx = np.arange(p)
    return np.abs(idx[:, None] - idx[None, :]).astype(np.float64)


def model_linear_decay(p: int) -> NDArray[np.float64]:
    """``sigma_ij = max(0, 1 - |i - j| / 5)``."""
    return np.maximum(0.0, 1.0 - _lags(p) / 5.0)


def model_squared_decay(p: int) -> NDArray[np.float64]:
    """``sigma_ij = (|i - j| + 1) ** -2``."""
    return (_lags(p) + 1.0) ** -2


def model_permutation_bandable(
    p: int, rng: np.random.Generator | None = None, *, perm: ArrayLike | None = None
) -> NDArray[np.float64]:
    """Linear-decay band ``max(0, 1 - 0.2 |s(i) - s(j)|)`` under a random relabeling ``s``."""
    if perm is None:
        if rng is None:
            raise ValueError("need an rng or an explicit permutation")
        s = rng.permutation(p)
    else:
        s = np.asarray(perm)
        if sorted(s.tolist()) != list(range(p)):
            raise DataError("perm must be a permutation of 0..p-1")
    return model_linear_decay(p)[np.ix_(s, s)]


def model_randomly_sparse(
    p: int, rng: np.random.Generator, *, density: float = 0.2
) -> NDArray[np.float64]:
    """``I + (D + D^T) / (||D + D^T|| + 0.01)`` with off-diagonal ``d_ij`` in {1, 0, -1}.

    Each ``d_ij`` is +1 or -1 with probability ``density / 2`` apiece. The
    normalization keeps the matrix positive definite.
    """
    if not 0.0 <= density <= 1.0:
        raise ValueError(f"density must lie in [0, 1], got {density}")
    half = density / 2.0
    D = rng.choice(np.array([1.0, 0.0, -1.0]), size=(p, p), p=[half, 1.0 - density, half])
    np.fill_diagonal(D, 0.0)
    E = D + D.T
    if not E.any():
        return np.eye(p)
    norm = float(np.max(np.abs(np.linalg.eigvalsh(E))))
    return np.eye(p) + E / (norm + 0.01)


def make_model(kind: str, p: int, rng: np.random.Generator, **kwargs) -> NDArray[np.float64]:
    if kind == "linear-decay":
        return model_linear_decay(p)
    if kind == "squared-decay":
        return model_squared_decay(p)
    if kind == "permutation-bandable":
        return model_permutation_bandable(p, rng)
    if kind == "randomly-sparse":
        return model_randomly_sparse(p, rng, **kwargs)
    raise ValueError(f"unknown model {kind!r}; expected one of {MODEL_KINDS}")


def gaussian_theta(sigma: ArrayLike) -> NDArray[np.float64]:
    """Variance of ``(X_i - mu_i)(X_j - mu_j)`` for Gaussian ``X``: ``s_ii s_jj + s_ij^2``."""
    s = np.asarray(sigma, dtype=np.float64)
    d = np.diag(s)
    return np.outer(d, d) + s * s


def psd_sqrt(sigma: ArrayLike, *, tol: float = 1e-10) -> NDArray[np.float64]:
    """Symmetric PSD square root; works for singular matrices."""
    s = np.asarray(sigma, dtype=np.float64)
    if s.ndim != 2 or s.shape[0] != s.shape[1]:
        raise DataError(f"covariance must be square, got shape {s.shape}")
    if not np.allclose(s, s.T, rtol=0.0, atol=tol * max(1.0, float(np.abs(s).max()))):
        raise DataError("covariance must be symmetric")
    s = (s + s.T) / 2.0
    w, V = np.linalg.eigh(s)
    scale = max(1.0, float(np.abs(w).max()))
    if w[0] < -tol * scale:
        raise DataError(f"covariance is not positive semi-definite (min eigenvalue {w[0]:.3g})")
    root = (V * np.sqrt(np.clip(w, 0.0, None))) @ V.T
    return (root + root.T) / 2.0


@dataclass(frozen=True, eq=False)
class SamplerSpec:
    """``X_k = Gamma Z_k + mu`` with standard-normal ``Z_k`` and ``Gamma Gamma^T = sigma``."""

    sigma: NDArray[np.float64]
    mu: NDArray[np.float64] | None = None
    factor: NDArray[np.float64] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        sigma = np.asarray(self.sigma, dtype=np.float64)
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "factor", psd_sqrt(sigma))
        mu = np.zeros(sigma.shape[0]) if self.mu is None else np.asarray(self.mu, dtype=np.float64)
        if mu.shape != (sigma.shape[0],):
            raise DataError(f"mean must have length {sigma.shape[0]}, got shape {mu.shape}")
        object.__setattr__(self, "mu", mu)

    @property
    def p(self) -> int:
        return self.sigma.shape[0]


def sample_gaussian(spec: SamplerSpec, n: int, rng: np.random.Generator) -> NDArray[np.float64]:
    """Draw a p x n matrix whose columns are i.i.d. N(mu, sigma)."""
    if n < 1:
        raise DataError(f"sample size must be positive, got {n}")
    Z = rng.standard_normal((spec.p, n))
    return spec.factor @ Z + spec.mu[:, None]


@dataclass(frozen=True)
class MissingMechanism:
    """Missing-completely-at-random observation pattern.

    ``mucr``: every cell observed with probability ``rates[0]``.
    ``mcr-block``: variables and samples are split in halves (first half gets
    the extra element when odd); the two diagonal blocks are observed with
    ``rates[0]``, the off-diagonal blocks with ``rates[1]``.
    """

    kind: str
    rates: tuple[float, ...]

    def __post_init__(self) -> None:
        expected = {"mucr": 1, "mcr-block": 2}
        if self.kind not in expected:
            raise ValueError(f"unknown mechanism {self.kind!r}; expected 'mucr' or 'mcr-block'")
        object.__setattr__(self, "rates", tuple(float(r) for r in self.rates))
        if len(self.rates) != expected[self.kind]:
            raise ValueError(f"{self.kind} takes {expected[self.kind]} rate(s), got {len(self.rates)}")
        for r in self.rates:
            if not 0.0 < r <= 1.0:
                raise ValueError(f"observation probabilities must lie in (0, 1], got {r}")

    @classmethod
    def mucr(cls, rho: float) -> MissingMechanism:
        return cls("mucr", (rho,))

    @classmethod
    def mcr_block(cls, rho1: float, rho2: float) -> MissingMechanism:
        return cls("mcr-block", (rho1, rho2))

    def probabilities(self, p: int, n: int) -> NDArray[np.float64]:
        if self.kind == "mucr":
            return np.full((p, n), self.rates[0])
        hp, hn = (p + 1) // 2, (n + 1) // 2
        probs = np.full((p, n), self.rates[1])
        probs[:hp, :hn] = self.rates[0]
        probs[hp:, hn:] = self.rates[0]
        return probs

    def __str__(self) -> str:
        return f"{self.kind}({','.join(f'{r:g}' for r in self.rates)})"


def apply_missingness(
    X: ArrayLike,
    mech: MissingMechanism,
    rng: np.random.Generator,
    *,
    max_retries: int = 1000,
) -> MaskedMatrix:
    """Independent Bernoulli mask; rows left entirely unobserved are redrawn.

    The mask depends only on ``mech`` and ``rng``, never on the values.
    """
    X = np.asarray(X, dtype=np.float64)
    p, n = X.shape
    probs = mech.probabilities(p, n)
    mask = rng.random((p, n)) < probs
    for _ in range(max_retries):
        empty = np.flatnonzero(~mask.any(axis=1))
        if empty.size == 0:
            break
        mask[empty] = rng.random((empty.size, n)) < probs[empty]
    else:
        raise DataError(f"could not draw a mask observing every variable after {max_retries} retries")
    return MaskedMatrix(X, mask)


def effective_sample_sizes(counts: PairwiseCounts) -> tuple[float, float]:
    """Average pair count ``sum n_ij / p^2`` and average single count ``sum n_i / p``."""
    c = counts.counts
    p = c.shape[0]
    return float(c.sum()) / p**2, float(np.trace(c)) / p
