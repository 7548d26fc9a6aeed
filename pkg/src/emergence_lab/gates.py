"""Boolean element networks, compiled to state-space TPMs.

State ``s`` encodes element ``k`` as bit ``k`` of ``s`` (little-endian in
element order). Rule tables are indexed the same way over an element's
inputs: entry ``sum(x_j << j)`` is ``p(element = 1)`` given input values
``x_j``. All elements update synchronously.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

import numpy as np

from .errors import EmptyEndogenous, FanInStateMissing, InvalidPartition, NetworkError, TooManyElements
from .model_space import ModelChoice, Partition, macro_tpm
from .tpm import Tpm, validate_tpm

MAX_ELEMENTS = 20

NAMED_RULES = ("AND", "OR", "XOR", "COPY")


def rule_table(rule: str, fan_in: int) -> np.ndarray:
    idx = np.arange(2**fan_in)
    bits = (idx[:, None] >> np.arange(fan_in)) & 1
    if rule == "AND":
        out = bits.all(axis=1)
    elif rule == "OR":
        out = bits.any(axis=1)
    elif rule == "XOR":
        out = bits.sum(axis=1) % 2 == 1
    elif rule == "COPY":
        if fan_in != 1:
            raise NetworkError(f"COPY takes exactly one input, got {fan_in}")
        out = bits[:, 0] == 1
    else:
        raise NetworkError(f"unknown rule {rule!r}")
    return out.astype(np.float64)


@dataclass(frozen=True)
class Element:
    name: str
    table: tuple[float, ...]
    inputs: tuple[int, ...]
    rule: str | None = None

    @property
    def deterministic(self) -> bool:
        return all(v in (0.0, 1.0) for v in self.table)


@dataclass(frozen=True)
class GateNetwork:
    elements: tuple[Element, ...]
    max_elements: int = field(default=MAX_ELEMENTS, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "elements", tuple(self.elements))
        N = len(self.elements)
        if N == 0:
            raise NetworkError("network has no elements")
        if N > self.max_elements:
            raise TooManyElements(f"{N} elements exceeds the cap of {self.max_elements}")
        for e in self.elements:
            if len(e.table) != 2 ** len(e.inputs):
                raise FanInStateMissing(
                    f"element {e.name!r}: table has {len(e.table)} entries, "
                    f"fan-in {len(e.inputs)} needs {2 ** len(e.inputs)}"
                )
            if any(not 0 <= i < N for i in e.inputs):
                raise NetworkError(f"element {e.name!r} reads an input out of range")
            if any(not 0.0 <= v <= 1.0 for v in e.table):
                raise NetworkError(f"element {e.name!r} has a probability outside [0, 1]")

    @property
    def N(self) -> int:
        return len(self.elements)

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "GateNetwork":
        elements = []
        for k, spec in enumerate(d["elements"]):
            inputs = tuple(int(i) for i in spec["inputs"])
            rule = spec["rule"]
            if isinstance(rule, str):
                table = tuple(rule_table(rule.upper(), len(inputs)).tolist())
                name_rule = rule.upper()
            else:
                table = tuple(float(v) for v in rule["table"])
                name_rule = None
            elements.append(Element(str(spec.get("name", f"e{k}")), table, inputs, name_rule))
        return cls(tuple(elements))

    def to_dict(self) -> dict[str, Any]:
        return {
            "elements": [
                {
                    "name": e.name,
                    "rule": e.rule if e.rule else {"table": list(e.table)},
                    "inputs": list(e.inputs),
                }
                for e in self.elements
            ]
        }


def and_network(wiring: Sequence[Sequence[int]], names: Sequence[str] | None = None) -> GateNetwork:
    """Network of two-input AND gates; ``wiring[k]`` lists element k's inputs."""
    elements = []
    for k, pair in enumerate(wiring):
        if len(pair) != 2:
            raise NetworkError(f"AND element {k} needs exactly 2 inputs, got {len(pair)}")
        name = names[k] if names else chr(ord("A") + k) if k < 26 else f"e{k}"
        elements.append(Element(name, tuple(rule_table("AND", 2).tolist()), tuple(pair), "AND"))
    return GateNetwork(tuple(elements))


def state_bits(N: int) -> np.ndarray:
    """``(2**N, N)`` array of element values for every state index."""
    s = np.arange(2**N)
    return (s[:, None] >> np.arange(N)) & 1


def _on_probabilities(g: GateNetwork) -> np.ndarray:
    bits = state_bits(g.N)
    p_on = np.empty((2**g.N, g.N))
    for k, e in enumerate(g.elements):
        if e.inputs:
            idx = (bits[:, list(e.inputs)] << np.arange(len(e.inputs))).sum(axis=1)
        else:
            idx = np.zeros(2**g.N, dtype=np.int64)
        p_on[:, k] = np.asarray(e.table)[idx]
    return p_on


def compile_tpm(g: GateNetwork) -> Tpm:
    """Synchronous-update TPM over all ``2**N`` network states."""
    p_on = _on_probabilities(g)
    rows = np.ones((2**g.N, 1))
    # product distribution built one element at a time; appending element k
    # as the high half puts it at bit k of the next-state index
    for k in range(g.N):
        col = p_on[:, k : k + 1]
        rows = np.concatenate([rows * (1.0 - col), rows * col], axis=1)
    return validate_tpm(rows)


@dataclass(frozen=True)
class ElementChoice:
    """Assign every element a role: endogenous, frozen to a value, or black-boxed.

    ``grouping`` partitions the ``2**k`` joint states of the endogenous
    elements (little-endian in the order of ``endogenous``); ``None`` keeps
    them all distinct.
    """

    endogenous: tuple[int, ...]
    frozen: Mapping[int, int] = field(default_factory=dict)
    blackboxed: tuple[int, ...] = ()
    grouping: Partition | None = None
    description: str = ""

    def __post_init__(self):
        object.__setattr__(self, "endogenous", tuple(sorted(int(i) for i in self.endogenous)))
        object.__setattr__(self, "blackboxed", tuple(sorted(int(i) for i in self.blackboxed)))
        object.__setattr__(self, "frozen", {int(k): int(v) for k, v in dict(self.frozen).items()})
        if not self.endogenous:
            raise EmptyEndogenous("no endogenous elements")
        if any(v not in (0, 1) for v in self.frozen.values()):
            raise NetworkError("frozen values must be 0 or 1")
        if self.grouping is not None and self.grouping.n != 2 ** len(self.endogenous):
            raise InvalidPartition(
                f"grouping covers {self.grouping.n} states, endogenous space has "
                f"{2 ** len(self.endogenous)}"
            )

    def __hash__(self):
        return hash((self.endogenous, tuple(sorted(self.frozen.items())), self.blackboxed, self.grouping))

    def check(self, N: int) -> None:
        roles = list(self.endogenous) + list(self.frozen) + list(self.blackboxed)
        if sorted(roles) != list(range(N)):
            raise NetworkError(
                "endogenous, frozen and black-boxed elements must be disjoint and cover all "
                f"{N} elements"
            )

    @property
    def m(self) -> int:
        return self.grouping.m if self.grouping is not None else 2 ** len(self.endogenous)

    @classmethod
    def identity(cls, N: int) -> "ElementChoice":
        return cls(tuple(range(N)), description="micro")

    def sort_key(self) -> tuple:
        grouping = self.grouping.assignment if self.grouping else tuple(range(self.m))
        return (self.m, grouping, self.endogenous, tuple(sorted(self.frozen.items())), self.blackboxed)

    def to_dict(self) -> dict[str, Any]:
        return {
            "endogenous": list(self.endogenous),
            "frozen": {str(k): v for k, v in sorted(self.frozen.items())},
            "blackboxed": list(self.blackboxed),
            "partition": list(self.grouping.assignment) if self.grouping else None,
            "description": self.description,
        }

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "ElementChoice":
        part = d.get("partition")
        return cls(
            tuple(d["endogenous"]),
            {int(k): int(v) for k, v in d.get("frozen", {}).items()},
            tuple(d.get("blackboxed", ())),
            Partition(tuple(part)) if part is not None else None,
            d.get("description", ""),
        )


def reduce_micro(micro: Tpm, N: int, c: ElementChoice) -> tuple[np.ndarray, np.ndarray]:
    """Collapse a compiled TPM onto the endogenous elements.

    Returns the ``2**k x 2**k`` endogenous TPM and the micro-space weight of
    each state before grouping (uniform over endogenous states and
    black-boxed values, zero off the frozen values).
    """
    c.check(N)
    bits = state_bits(N)
    endo = list(c.endogenous)
    k = len(endo)
    endo_index = (bits[:, endo] << np.arange(k)).sum(axis=1)
    consistent = np.ones(2**N, dtype=bool)
    for e, v in c.frozen.items():
        consistent &= bits[:, e] == v
    n_bb = 2 ** len(c.blackboxed)
    # input side: average rows over black-boxed values for each endogenous state
    weights = np.zeros(2**N)
    weights[consistent] = 1.0 / (2**k * n_bb)
    A = np.zeros((2**k, 2**N))
    A[endo_index[consistent], np.flatnonzero(consistent)] = 1.0 / n_bb
    # output side: marginalize onto endogenous elements
    Q = np.zeros((2**N, 2**k))
    Q[np.arange(2**N), endo_index] = 1.0
    return A @ micro.rows @ Q, weights


def apply_element_choice(g: GateNetwork, c: ElementChoice, micro: Tpm | None = None) -> tuple[Tpm, np.ndarray]:
    """Macro TPM of an element-level model choice and its warped micro intervention.

    Frozen elements are held at their value; black-boxed elements are
    redrawn uniformly at each intervention and summed out of the effects.
    The endogenous joint states are then grouped by ``c.grouping``.
    """
    if micro is None:
        micro = compile_tpm(g)
    reduced, weights = reduce_micro(micro, g.N, c)
    red = validate_tpm(reduced, tol=1e-8)
    if c.grouping is None:
        return red, weights
    mc = ModelChoice(tuple(range(red.n)), c.grouping)
    macro = macro_tpm(red, mc)
    # regroup intervention mass: each macrostate gets 1/m, split evenly
    endo = list(c.endogenous)
    bits = state_bits(g.N)
    endo_index = (bits[:, endo] << np.arange(len(endo))).sum(axis=1)
    labels = np.asarray(c.grouping.assignment)[endo_index]
    block_sizes = np.bincount(c.grouping.assignment, minlength=c.m)
    scale = (2 ** len(endo) / c.m) / block_sizes[labels]
    return macro, weights * scale
