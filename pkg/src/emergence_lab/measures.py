"""Effective information and its determinism/degeneracy decomposition.

Every function takes an intervention distribution ``id`` over the states of
the TPM. At the microscale this is uniform; model choices warp it. Effect
information is weighted by ``id`` so that ``ei(t, id)`` is exactly the mutual
information between an input drawn from ``id`` and the resulting output.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

import numpy as np

from .errors import DistributionError, StateOutsideSupport
from .tpm import Tpm, as_dist, entropy, uniform


@dataclass(frozen=True)
class CausalReport:
    ei: float
    effect_info_per_state: tuple[float, ...]
    determinism: float
    degeneracy: float
    effectiveness: float
    size: float
    intervention_entropy: float

    def to_dict(self) -> dict[str, Any]:
        return {
            "ei": self.ei,
            "eff": self.effectiveness,
            "determinism": self.determinism,
            "degeneracy": self.degeneracy,
            "size": self.size,
            "intervention_entropy": self.intervention_entropy,
            "effect_info": list(self.effect_info_per_state),
        }


def _check(t: Tpm, id) -> np.ndarray:
    if id is None:
        return uniform(t.n)
    p = as_dist(id)
    if p.size != t.n:
        raise DistributionError(f"intervention has {p.size} entries, TPM has {t.n} states")
    return p


def _row_kl(rows: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Per-row ``D_KL(rows[i] || q)``.

    Callers guarantee absolute continuity; terms where ``q`` underflowed to
    zero are dropped.
    """
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where((rows > 0) & (q > 0), rows * (np.log2(rows) - np.log2(q)), 0.0)
    return terms.sum(axis=1)


def effect_distribution(t: Tpm, id=None) -> np.ndarray:
    p = _check(t, id)
    return p @ t.rows


def effect_information(t: Tpm, i: int, id=None) -> float:
    """KL divergence of state ``i``'s transition row from the effect distribution."""
    p = _check(t, id)
    if not 0 <= i < t.n or p[i] <= 0:
        raise StateOutsideSupport(f"state {i} has no intervention mass")
    ed = p @ t.rows
    return max(float(_row_kl(t.rows[i : i + 1], ed)[0]), 0.0)


def _effect_infos(t: Tpm, p: np.ndarray) -> np.ndarray:
    ed = p @ t.rows
    vals = np.where(p > 0, _row_kl(t.rows, ed), 0.0)
    return np.maximum(vals, 0.0)


def ei(t: Tpm, id=None) -> float:
    p = _check(t, id)
    if t.n == 1:
        return 0.0
    return max(float(p @ _effect_infos(t, p)), 0.0)


def determinism(t: Tpm, id=None) -> float:
    p = _check(t, id)
    if t.n == 1:
        return 0.0
    u = uniform(t.n)
    return float(p @ _row_kl(t.rows, u)) / np.log2(t.n)


def degeneracy(t: Tpm, id=None) -> float:
    p = _check(t, id)
    if t.n == 1:
        return 0.0
    ed = p @ t.rows
    return float(_row_kl(ed[None, :], uniform(t.n))[0]) / np.log2(t.n)


def full_report(t: Tpm, id=None) -> CausalReport:
    """All causal measures of ``t`` under intervention ``id`` (uniform if omitted).

    ``size`` is ``log2(n)`` of the full state space. For a single-state
    system every quantity is 0.
    """
    p = _check(t, id)
    infos = _effect_infos(t, p)
    if t.n == 1:
        return CausalReport(0.0, (0.0,), 0.0, 0.0, 0.0, 0.0, 0.0)
    det = determinism(t, p)
    deg = degeneracy(t, p)
    return CausalReport(
        ei=ei(t, p),
        effect_info_per_state=tuple(float(x) for x in infos),
        determinism=det,
        degeneracy=deg,
        effectiveness=det - deg,
        size=float(np.log2(t.n)),
        intervention_entropy=entropy(p),
    )


def conditional_entropy_xy(t: Tpm, id=None) -> float:
    """``H(X | Y)`` for input ``X ~ id`` passed through ``t``."""
    p = _check(t, id)
    joint = p[:, None] * t.rows
    py = joint.sum(axis=0)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(joint > 0, joint * np.log2(py[None, :] / joint), 0.0)
    return float(terms.sum())
