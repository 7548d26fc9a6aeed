"""Probability primitives: transition matrices, distributions and divergences.

All information quantities are in bits. ``0 * log 0`` is taken as 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import (
    AbsoluteContinuityViolation,
    DistributionError,
    NegativeEntry,
    NonSquare,
    RowSumOutOfTolerance,
    TpmValidationError,
)

ROW_SUM_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class Tpm:
    """Row-stochastic transition matrix, ``rows[i, j] = p(j at t+1 | do(i) at t)``.

    Build instances through :func:`validate_tpm`; the constructor itself
    does not check stochasticity.
    """

    rows: np.ndarray
    labels: tuple[str, ...] | None = field(default=None)

    @property
    def n(self) -> int:
        return int(self.rows.shape[0])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Tpm):
            return NotImplemented
        return self.labels == other.labels and np.array_equal(self.rows, other.rows)

    def __repr__(self) -> str:
        return f"Tpm(n={self.n}, labels={self.labels})"


def validate_tpm(
    rows: Sequence[Sequence[float]] | np.ndarray,
    labels: Sequence[str] | None = None,
    tol: float = ROW_SUM_TOL,
) -> Tpm:
    """Check a square row-stochastic matrix and wrap it as a :class:`Tpm`.

    Row sums within ``tol`` of 1 are accepted as given; nothing is
    renormalized.
    """
    arr = np.array(rows, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] < 1:
        raise NonSquare(f"expected a non-empty square matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        r, c = np.argwhere(~np.isfinite(arr))[0]
        raise TpmValidationError(f"non-finite entry at row {r}, column {c}")
    neg = np.argwhere(arr < 0)
    if len(neg):
        r, c = neg[0]
        raise NegativeEntry(int(r), int(c), float(arr[r, c]))
    sums = arr.sum(axis=1)
    bad = np.flatnonzero(np.abs(sums - 1.0) > tol)
    if len(bad):
        raise RowSumOutOfTolerance(int(bad[0]), float(sums[bad[0]]), tol)
    if labels is not None:
        labels = tuple(str(s) for s in labels)
        if len(labels) != arr.shape[0]:
            raise TpmValidationError(
                f"{len(labels)} labels given for {arr.shape[0]} states"
            )
    arr.setflags(write=False)
    return Tpm(arr, labels)


def as_dist(p: Sequence[float] | np.ndarray, tol: float = ROW_SUM_TOL) -> np.ndarray:
    """Validate a probability vector and return it as a float array."""
    arr = np.asarray(p, dtype=np.float64)
    if arr.ndim != 1 or arr.size == 0:
        raise DistributionError(f"expected a non-empty vector, got shape {arr.shape}")
    if np.any(arr < 0) or np.any(arr > 1 + tol) or not np.all(np.isfinite(arr)):
        raise DistributionError("entries must lie in [0, 1]")
    if abs(arr.sum() - 1.0) > tol:
        raise DistributionError(f"distribution sums to {arr.sum()!r}")
    return arr


def uniform(n: int) -> np.ndarray:
    return np.full(n, 1.0 / n)


def entropy(d: Sequence[float] | np.ndarray) -> float:
    p = as_dist(d)
    nz = p[p > 0]
    return float(-np.sum(nz * np.log2(nz)) + 0.0)


def kl_divergence(p: Sequence[float] | np.ndarray, q: Sequence[float] | np.ndarray) -> float:
    """``D_KL(p || q)`` in bits.

    Raises:
        AbsoluteContinuityViolation: if ``p`` puts mass where ``q`` has none.
    """
    p = as_dist(p)
    q = as_dist(q)
    if p.shape != q.shape:
        raise DistributionError(f"length mismatch: {p.size} vs {q.size}")
    support = p > 0
    escaped = np.flatnonzero(support & (q <= 0))
    if len(escaped):
        raise AbsoluteContinuityViolation(int(escaped[0]))
    val = float(np.sum(p[support] * (np.log2(p[support]) - np.log2(q[support]))))
    # rounding can push an exact zero slightly negative
    return max(val, 0.0)


def emd(p: Sequence[float] | np.ndarray, q: Sequence[float] | np.ndarray) -> float:
    """Earth mover's distance under the unit ground metric.

    With every pair of distinct states one unit apart the optimal transport
    cost is the total variation distance ``0.5 * sum |p - q|``.
    """
    p = as_dist(p)
    q = as_dist(q)
    if p.shape != q.shape:
        raise DistributionError(f"length mismatch: {p.size} vs {q.size}")
    return float(min(0.5 * np.abs(p - q).sum(), 1.0))
