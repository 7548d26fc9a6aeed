"""Macroscale model construction.

A :class:`ModelChoice` picks a subset of endogenous micro states and groups
them into macrostates. The remaining states are exogenous: they receive no
intervention mass. A macro intervention on a macrostate averages the micro
interventions on its members, so every macrostate gets mass ``1/m`` split
evenly among its members.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Iterable, Sequence

import numpy as np

from .errors import EmptyEndogenous, InvalidPartition, MassEscapesEndogenous
from .measures import CausalReport, full_report
from .tpm import Tpm, uniform, validate_tpm

LEAK_TOL = 1e-9


def is_restricted_growth(seq: Sequence[int]) -> bool:
    top = -1
    for v in seq:
        if v < 0 or v > top + 1:
            return False
        top = max(top, v)
    return True


def canonical_rgs(labels: Iterable[int]) -> tuple[int, ...]:
    """Relabel arbitrary block labels into restricted-growth form."""
    seen: dict[int, int] = {}
    return tuple(seen.setdefault(int(v), len(seen)) for v in labels)


@dataclass(frozen=True)
class Partition:
    """Set partition stored as a restricted-growth string."""

    assignment: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "assignment", tuple(int(v) for v in self.assignment))
        if not self.assignment:
            raise InvalidPartition("partition of an empty set")
        if not is_restricted_growth(self.assignment):
            raise InvalidPartition(f"{self.assignment} is not a restricted-growth string")

    @property
    def n(self) -> int:
        return len(self.assignment)

    @property
    def m(self) -> int:
        return max(self.assignment) + 1

    @classmethod
    def singletons(cls, n: int) -> "Partition":
        return cls(tuple(range(n)))

    @classmethod
    def from_labels(cls, labels: Iterable[int]) -> "Partition":
        return cls(canonical_rgs(labels))

    @classmethod
    def from_blocks(cls, blocks: Iterable[Iterable[int]], n: int) -> "Partition":
        labels = [-1] * n
        for b, block in enumerate(blocks):
            for i in block:
                if labels[i] != -1:
                    raise InvalidPartition(f"element {i} appears in two blocks")
                labels[i] = b
        if -1 in labels:
            raise InvalidPartition(f"element {labels.index(-1)} is not covered")
        return cls.from_labels(labels)

    def blocks(self) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in range(self.m)]
        for i, b in enumerate(self.assignment):
            out[b].append(i)
        return out


@dataclass(frozen=True)
class ModelChoice:
    """Endogenous micro states plus a grouping of them into macrostates.

    ``partition`` is indexed by position within ``endogenous`` (sorted).
    """

    endogenous: tuple[int, ...]
    partition: Partition
    description: str = ""

    def __post_init__(self):
        endo = tuple(sorted(int(i) for i in self.endogenous))
        if not endo:
            raise EmptyEndogenous("a model needs at least one endogenous state")
        if len(set(endo)) != len(endo):
            raise InvalidPartition("duplicate endogenous state")
        if endo[0] < 0:
            raise InvalidPartition("negative state index")
        object.__setattr__(self, "endogenous", endo)
        if self.partition.n != len(endo):
            raise InvalidPartition(
                f"partition covers {self.partition.n} states, {len(endo)} are endogenous"
            )

    @property
    def m(self) -> int:
        return self.partition.m

    @classmethod
    def identity(cls, n: int) -> "ModelChoice":
        return cls(tuple(range(n)), Partition.singletons(n), "micro")

    @classmethod
    def coarse(cls, blocks: Iterable[Iterable[int]], n: int, description: str = "") -> "ModelChoice":
        return cls(tuple(range(n)), Partition.from_blocks(blocks, n), description)

    def is_identity(self, n: int) -> bool:
        return len(self.endogenous) == n and self.m == n

    def check(self, n: int) -> None:
        if self.endogenous[-1] >= n:
            raise InvalidPartition(f"state {self.endogenous[-1]} out of range for n={n}")

    def macro_blocks(self) -> list[list[int]]:
        """Macrostates as lists of micro state indices."""
        return [[self.endogenous[k] for k in b] for b in self.partition.blocks()]

    def labels(self, n: int) -> np.ndarray:
        """Length-``n`` macro label per micro state, ``-1`` for exogenous."""
        self.check(n)
        lab = np.full(n, -1, dtype=np.int64)
        lab[list(self.endogenous)] = self.partition.assignment
        return lab

    def sort_key(self) -> tuple:
        return (self.m, self.partition.assignment, self.endogenous)

    def to_dict(self) -> dict[str, Any]:
        return {
            "endogenous": list(self.endogenous),
            "partition": list(self.partition.assignment),
            "description": self.description,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "ModelChoice":
        return cls(tuple(d["endogenous"]), Partition(tuple(d["partition"])), d.get("description", ""))


def warped_intervention(c: ModelChoice, n: int) -> np.ndarray:
    c.check(n)
    out = np.zeros(n)
    for block in c.macro_blocks():
        out[block] = 1.0 / (c.m * len(block))
    return out


def _membership(c: ModelChoice, n: int) -> np.ndarray:
    P = np.zeros((n, c.m))
    for k, block in enumerate(c.macro_blocks()):
        P[block, k] = 1.0
    return P


def macro_tpm(t: Tpm, c: ModelChoice, leak_tol: float = LEAK_TOL) -> Tpm:
    """Coarse-grain ``t`` under ``c``.

    Macro row ``J`` is the unweighted mean of the member micro rows; macro
    column ``K`` sums that mean over the members of ``K``.

    Raises:
        MassEscapesEndogenous: an endogenous state moves into an exogenous
            state with probability above ``leak_tol``.
    """
    c.check(t.n)
    if c.is_identity(t.n):
        return t
    endo = list(c.endogenous)
    leaked = 1.0 - t.rows[np.ix_(endo, endo)].sum(axis=1)
    worst = int(np.argmax(leaked))
    if leaked[worst] > leak_tol:
        raise MassEscapesEndogenous(endo[worst], float(leaked[worst]))
    P = _membership(c, t.n)
    sizes = P.sum(axis=0)
    macro = (P.T @ t.rows @ P) / sizes[:, None]
    if leak_tol > LEAK_TOL:
        # tolerated leak is dropped, so restore stochasticity
        macro = macro / macro.sum(axis=1, keepdims=True)
    return validate_tpm(macro, tol=max(leak_tol, LEAK_TOL) * 2)


def macro_ei(t: Tpm, c: ModelChoice, leak_tol: float = LEAK_TOL) -> CausalReport:
    mt = macro_tpm(t, c, leak_tol)
    return full_report(mt, uniform(mt.n))


def macro_ei_from_warped(t: Tpm, c: ModelChoice) -> float:
    """EI of ``c`` computed in micro space from its warped intervention.

    Each macro intervention is the ``id``-weighted mixture of its members'
    micro rows; outputs are read through the partition. Agrees with
    ``macro_ei(t, c).ei`` without building the macro TPM.
    """
    p = warped_intervention(c, t.n)
    P = _membership(c, t.n)
    out_macro = t.rows @ P  # micro input -> macro output
    ed = p @ out_macro
    total = 0.0
    for block in c.macro_blocks():
        w = p[block].sum()
        row = (p[block] @ out_macro[block]) / w
        nz = row > 0
        total += w * float(np.sum(row[nz] * np.log2(row[nz] / ed[nz])))
    return max(total, 0.0)


def generalized_case(n: int) -> tuple[Tpm, ModelChoice]:
    """``n - 1`` states mixing uniformly among themselves plus one fixed point.

    Returns the TPM and the two-macrostate grouping that makes it
    deterministic.
    """
    if n < 3:
        raise ValueError(f"generalized case needs n >= 3, got {n}")
    rows = np.zeros((n, n))
    rows[: n - 1, : n - 1] = 1.0 / (n - 1)
    rows[n - 1, n - 1] = 1.0
    choice = ModelChoice.coarse([range(n - 1), [n - 1]], n, "uniform block | fixed point")
    return validate_tpm(rows), choice
