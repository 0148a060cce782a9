"""Matrix losses and replicate aggregation for simulation reports."""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike

from .errors import DataError
from .linalg import frobenius_norm, op_l1_norm, spectral_norm

__all__ = ["LOSS_KINDS", "loss", "RiskReport", "aggregate"]

LOSS_KINDS = ("spectral", "l1", "frobenius")


def loss(est: ArrayLike, truth: ArrayLike, kind: str = "spectral") -> float:
    a = np.asarray(est, dtype=np.float64)
    b = np.asarray(truth, dtype=np.float64)
    if a.shape != b.shape:
        raise DataError(f"dimension mismatch: {a.shape} vs {b.shape}")
    diff = a - b
    if kind == "spectral":
        return spectral_norm(diff)
    if kind == "l1":
        return op_l1_norm(diff)
    if kind == "frobenius":
        return frobenius_norm(diff)
    raise ValueError(f"unknown loss {kind!r}; expected one of {LOSS_KINDS}")


@dataclass(frozen=True)
class RiskReport:
    losses: tuple[float, ...]
    kind: str = "spectral"

    @property
    def reps(self) -> int:
        return len(self.losses)

    @property
    def mean(self) -> float:
        return math.fsum(self.losses) / len(self.losses)

    @property
    def sd(self) -> float | None:
        """Sample standard deviation (divisor reps - 1); None for one replicate."""
        if len(self.losses) < 2:
            return None
        m = self.mean
        return math.sqrt(math.fsum((x - m) ** 2 for x in self.losses) / (len(self.losses) - 1))

    def format(self, digits: int = 2) -> str:
        sd = "n/a" if self.sd is None else f"{self.sd:.{digits}f}"
        return f"{self.mean:.{digits}f}({sd})"


def aggregate(losses: Sequence[float], kind: str = "spectral") -> RiskReport:
    if len(losses) == 0:
        raise ValueError("need at least one replicate")
    return RiskReport(tuple(float(x) for x in losses), kind)
