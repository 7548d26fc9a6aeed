"""Search over model choices for the maximum-EI macro model.

Ladder levels widen the set of admissible choices:

* 0 - the micro model only
* 1 - every coarse-graining of the full state space
* 2 - every endogenous subset of states, each with every coarse-graining
* 3 - (element networks) additionally freeze or black-box elements

Each level's choice set contains the previous one, so the best EI never
drops as the level rises.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import IntEnum
from functools import lru_cache
from itertools import product
from typing import Any, Callable, Iterator, Sequence, Union

import numpy as np

from .capacity import blahut_arimoto
from .errors import RefusedAboveThreshold
from .gates import ElementChoice, GateNetwork, apply_element_choice, compile_tpm, reduce_micro
from .measures import full_report
from .model_space import LEAK_TOL, ModelChoice, Partition, macro_ei, warped_intervention
from .tpm import Tpm, emd, uniform

DEFAULT_BUDGET = 10_000_000
MAX_ENUM_N = 13
TIE_TOL = 1e-12

Choice = Union[ModelChoice, ElementChoice]


class LadderLevel(IntEnum):
    MICRO = 0
    COARSE = 1
    ENDOGENOUS = 2
    ELEMENT = 3


@dataclass
class SearchResult:
    best_choice: Choice
    best_ei: float
    evaluated: int
    method: str
    warped_id: np.ndarray
    skipped: int = 0
    level: int = 0

    def to_dict(self) -> dict[str, Any]:
        kind = "element" if isinstance(self.best_choice, ElementChoice) else "state"
        return {
            "best_choice": self.best_choice.to_dict(),
            "choice_kind": kind,
            "best_ei": self.best_ei,
            "evaluated": self.evaluated,
            "skipped": self.skipped,
            "method": self.method,
            "level": int(self.level),
            "warped_id": self.warped_id.tolist(),
        }


# --- partitions -----------------------------------------------------------


@lru_cache(maxsize=None)
def bell_number(n: int) -> int:
    """Number of set partitions of ``n`` items (Bell triangle)."""
    if n < 0:
        raise ValueError("n must be >= 0")
    row = [1]
    for _ in range(n):
        nxt = [row[-1]]
        for v in row:
            nxt.append(nxt[-1] + v)
        row = nxt
    return row[0]


def enumerate_partitions(n: int, max_n: int = MAX_ENUM_N) -> Iterator[Partition]:
    """All set partitions of ``range(n)`` as restricted-growth strings, lexicographically.

    Raises:
        RefusedAboveThreshold: ``n > max_n``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if n > max_n:
        raise RefusedAboveThreshold(bell_number(n), bell_number(max_n))
    a = [0] * n
    top = [0] * n  # top[i] = max(a[:i]) for i >= 1
    while True:
        yield Partition(tuple(a))
        # rightmost position that can still grow
        i = n - 1
        while i > 0 and a[i] > top[i]:
            i -= 1
        if i == 0:
            return
        a[i] += 1
        for j in range(i + 1, n):
            a[j] = 0
            top[j] = max(top[j - 1], a[j - 1])


@lru_cache(maxsize=16)
def rgs_table(n: int) -> np.ndarray:
    """Every restricted-growth string of length ``n`` as rows, lexicographic."""
    if n > MAX_ENUM_N:
        raise RefusedAboveThreshold(bell_number(n), bell_number(MAX_ENUM_N))
    table = np.zeros((1, 1), dtype=np.int8)
    for _ in range(1, n):
        nxt = table.max(axis=1) + 2  # children per row
        rep = np.repeat(table, nxt, axis=0)
        starts = np.cumsum(nxt) - nxt
        last = np.arange(len(rep)) - np.repeat(starts, nxt)
        table = np.concatenate([rep, last[:, None].astype(np.int8)], axis=1)
    table.setflags(write=False)
    return table


# --- batched evaluation ---------------------------------------------------


def batch_macro_ei(rows: np.ndarray, rgs: np.ndarray) -> np.ndarray:
    """EI (uniform over macrostates) of ``rows`` coarse-grained by each string in ``rgs``.

    ``rows`` must be row-stochastic; ``rgs`` has one partition per row.
    """
    B, k = rgs.shape
    P = (rgs[:, :, None] == np.arange(k)).astype(np.float64)  # (B, micro, macro)
    sizes = P.sum(axis=1)
    present = sizes > 0
    m = present.sum(axis=1)
    summed = np.einsum("bik,ij->bkj", P, rows)
    macro = np.einsum("bkj,bjl->bkl", summed, P)
    macro /= np.where(present, sizes, 1.0)[:, :, None]
    ed = macro.sum(axis=1) / m[:, None]
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where((macro > 0) & (ed[:, None, :] > 0), macro * (np.log2(macro) - np.log2(ed[:, None, :])), 0.0)
    return np.maximum(terms.sum(axis=(1, 2)) / m, 0.0)


def _pick(values: np.ndarray, rgs: np.ndarray) -> tuple[float, int]:
    """Best value and index, ties to fewest blocks then lexicographic order."""
    top = float(values.max())
    tied = np.flatnonzero(values >= top - TIE_TOL)
    blocks = rgs[tied].max(axis=1)
    return top, int(tied[np.argmin(blocks)])


def closed_subsets(t: Tpm, leak_tol: float = LEAK_TOL) -> tuple[list[tuple[int, ...]], int]:
    """Endogenous subsets whose states never leave the subset.

    Returns the closed subsets (ordered by size, then index order) and the
    number of non-empty subsets rejected for leaking.
    """
    n = t.n
    masks = ((np.arange(1, 2**n)[:, None] >> np.arange(n)) & 1).astype(bool)
    inside = masks.astype(np.float64) @ t.rows.T  # mass each row keeps inside mask
    leak = np.where(masks, 1.0 - inside, 0.0).max(axis=1)
    ok = leak <= leak_tol
    subsets = [tuple(np.flatnonzero(mk).tolist()) for mk in masks[ok]]
    subsets.sort(key=lambda s: (len(s), s))
    return subsets, int((~ok).sum())


def level_choices(t: Tpm, level: int, leak_tol: float = LEAK_TOL) -> Iterator[ModelChoice]:
    """Every valid state-space model choice at ``level`` (0, 1 or 2)."""
    level = LadderLevel(level)
    if level == LadderLevel.MICRO:
        yield ModelChoice.identity(t.n)
        return
    subsets = [tuple(range(t.n))] if level == LadderLevel.COARSE else closed_subsets(t, leak_tol)[0]
    for endo in subsets:
        for part in enumerate_partitions(len(endo)):
            yield ModelChoice(endo, part)


def _count_state_choices(t: Tpm, level: int, leak_tol: float) -> tuple[int, list, int]:
    if level == LadderLevel.MICRO:
        return 1, [tuple(range(t.n))], 0
    if level == LadderLevel.COARSE:
        return bell_number(t.n), [tuple(range(t.n))], 0
    if t.n > 20:
        # too many subsets to even list; report the unpruned count
        return bell_number(t.n + 1) - 1, [], 0
    subsets, skipped = closed_subsets(t, leak_tol)
    return sum(bell_number(len(s)) for s in subsets), subsets, skipped


def _roles(N: int) -> Iterator[ElementChoice]:
    # 0 endogenous, 1 frozen at 0, 2 frozen at 1, 3 black-boxed
    for roles in product(range(4), repeat=N):
        endo = tuple(i for i, r in enumerate(roles) if r == 0)
        if not endo:
            continue
        yield ElementChoice(
            endo,
            {i: r - 1 for i, r in enumerate(roles) if r in (1, 2)},
            tuple(i for i, r in enumerate(roles) if r == 3),
        )


def _element_count(N: int) -> int:
    return sum(math.comb(N, k) * 3 ** (N - k) * bell_number(2**k) for k in range(1, N + 1))


def _rank(choice: Choice) -> tuple:
    # state-space choices rank ahead of element choices with the same key
    key = choice.sort_key()
    return (key[0], int(isinstance(choice, ElementChoice))) + key[1:]


@dataclass
class _Best:
    value: float = -math.inf
    key: tuple = ()
    choice: Any = None

    def offer(self, value: float, choice: Choice) -> None:
        key = _rank(choice)
        if value > self.value + TIE_TOL or (value >= self.value - TIE_TOL and key < self.key):
            self.value, self.key, self.choice = value, key, choice


def _search_rows(
    rows: np.ndarray, make: Callable[[Partition], Any], best: _Best, threads: int, chunk: int
) -> int:
    """Evaluate every partition of ``rows``' state space into ``best``."""
    k = rows.shape[0]
    table = rgs_table(k)
    spans = [(s, min(s + chunk, len(table))) for s in range(0, len(table), chunk)]

    def run(span):
        sub = table[span[0] : span[1]]
        val, idx = _pick(batch_macro_ei(rows, sub), sub)
        return val, span[0] + idx

    if threads > 1 and len(spans) > 1:
        with ThreadPoolExecutor(threads) as pool:
            found = list(pool.map(run, spans))
    else:
        found = [run(s) for s in spans]
    for val, idx in found:
        best.offer(val, make(Partition(tuple(int(v) for v in table[idx]))))
    return len(table)


def _as_tpm(system: Tpm | GateNetwork) -> tuple[Tpm, GateNetwork | None]:
    if isinstance(system, GateNetwork):
        return compile_tpm(system), system
    return system, None


def exhaustive_search(
    system: Tpm | GateNetwork,
    level: int = LadderLevel.COARSE,
    budget: float = DEFAULT_BUDGET,
    threads: int = 1,
    leak_tol: float = LEAK_TOL,
    chunk: int = 8192,
) -> SearchResult:
    """Evaluate every model choice at ``level`` and return the maximum-EI one.

    Ties (within 1e-12 bits) go to fewer macrostates, then the smaller
    restricted-growth string, then the smaller endogenous set; state-space
    choices precede element choices at equal keys. Results do not depend on
    ``threads``.

    Raises:
        RefusedAboveThreshold: the level holds more than ``budget`` choices.
        ValueError: level 3 without an element network.
    """
    level = LadderLevel(level)
    t, net = _as_tpm(system)
    if level == LadderLevel.ELEMENT and net is None:
        raise ValueError("ladder level 3 needs an element network")
    state_level = min(level, LadderLevel.ENDOGENOUS)
    count, subsets, skipped = _count_state_choices(t, state_level, leak_tol)
    if level == LadderLevel.ELEMENT:
        count += _element_count(net.N)
    if count > budget:
        raise RefusedAboveThreshold(count, budget)

    if level == LadderLevel.MICRO:
        return _finish(t, net, ModelChoice.identity(t.n), 1, "exhaustive", 0, level)
    best = _Best()
    evaluated = 0
    for endo in subsets:
        rows = t.rows[np.ix_(endo, endo)]
        evaluated += _search_rows(rows, lambda p, e=endo: ModelChoice(e, p), best, threads, chunk)

    if level == LadderLevel.ELEMENT:
        for ec in _roles(net.N):
            reduced, _ = reduce_micro(t, net.N, ec)
            evaluated += _search_rows(
                reduced,
                lambda p, ec=ec: ElementChoice(ec.endogenous, ec.frozen, ec.blackboxed, p),
                best,
                threads,
                chunk,
            )
    return _finish(t, net, best.choice, evaluated, "exhaustive", skipped, level)


def _finish(t, net, choice, evaluated, method, skipped, level) -> SearchResult:
    # recompute the winner on the canonical path so values match analyze/report
    if isinstance(choice, ElementChoice):
        mt, warped = apply_element_choice(net, choice, micro=t)
        value = full_report(mt, uniform(mt.n)).ei
    else:
        value = macro_ei(t, choice).ei
        warped = warped_intervention(choice, t.n)
    return SearchResult(choice, value, evaluated, method, warped, skipped, int(level))


# --- annealing ------------------------------------------------------------


@dataclass(frozen=True)
class AnnealSchedule:
    t0: float = 0.05
    cooling: float = 0.998
    steps: int = 4000


def _ei_of_labels(rows: np.ndarray, labels: np.ndarray, leak_tol: float) -> float | None:
    endo = np.flatnonzero(labels >= 0)
    if len(endo) == 0:
        return None
    sub = rows[np.ix_(endo, endo)]
    if 1.0 - sub.sum(axis=1).min() > leak_tol:
        return None
    lab = labels[endo]
    m = int(lab.max()) + 1
    P = np.zeros((len(endo), m))
    P[np.arange(len(endo)), lab] = 1.0
    macro = (P.T @ sub @ P) / P.sum(axis=0)[:, None]
    ed = macro.mean(axis=0)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where((macro > 0) & (ed > 0), macro * (np.log2(macro) - np.log2(ed)), 0.0)
    return max(float(terms.sum()) / m, 0.0)


def _canon(labels: np.ndarray) -> np.ndarray:
    out = np.full_like(labels, -1)
    seen: dict[int, int] = {}
    for i, v in enumerate(labels):
        if v >= 0:
            out[i] = seen.setdefault(int(v), len(seen))
    return out


def _propose(labels: np.ndarray, rng: np.random.Generator, toggle: bool) -> np.ndarray:
    lab = labels.copy()
    endo = np.flatnonzero(lab >= 0)
    m = int(lab.max()) + 1 if len(endo) else 0
    moves = ["merge", "split", "move"] + (["toggle"] if toggle else [])
    move = moves[rng.integers(len(moves))]
    if move == "merge" and m >= 2:
        a, b = rng.choice(m, size=2, replace=False)
        lab[lab == b] = a
    elif move == "split" and m >= 1:
        a = rng.integers(m)
        members = np.flatnonzero(lab == a)
        if len(members) >= 2:
            mask = rng.random(len(members)) < 0.5
            if mask.all() or not mask.any():
                mask[rng.integers(len(members))] ^= True
            lab[members[mask]] = m
    elif move == "move" and len(endo):
        i = endo[rng.integers(len(endo))]
        lab[i] = rng.integers(m + 1)
    elif move == "toggle":
        i = rng.integers(len(lab))
        lab[i] = -1 if lab[i] >= 0 else rng.integers(m + 1)
    return _canon(lab)


def _key(labels: np.ndarray) -> tuple:
    endo = labels[labels >= 0]
    return (int(endo.max()) + 1 if len(endo) else 0, tuple(endo.tolist()), tuple(np.flatnonzero(labels >= 0).tolist()))


def _anneal_chain(rows, start, rng, schedule, toggle, leak_tol):
    cur = start
    cur_val = _ei_of_labels(rows, cur, leak_tol)
    best, best_val = cur, cur_val
    temp = schedule.t0
    evaluated = 1
    for _ in range(schedule.steps):
        cand = _propose(cur, rng, toggle)
        val = _ei_of_labels(rows, cand, leak_tol)
        evaluated += 1
        temp *= schedule.cooling
        if val is None:
            continue
        delta = val - cur_val
        if delta >= 0 or rng.random() < math.exp(delta / max(temp, 1e-300)):
            cur, cur_val = cand, val
            if val > best_val + TIE_TOL or (abs(val - best_val) <= TIE_TOL and _key(cand) < _key(best)):
                best, best_val = cand, val
    return best_val, best, evaluated


def _row_classes(rows: np.ndarray) -> np.ndarray:
    """Group states whose transition rows are identical, in first-seen order."""
    _, first, inverse = np.unique(rows, axis=0, return_index=True, return_inverse=True)
    return _canon(np.argsort(np.argsort(first))[inverse.ravel()])


def _anneal_rows(rows, level, seed, schedule, chains, threads, leak_tol):
    n = rows.shape[0]
    seeds = np.random.SeedSequence(seed).spawn(chains)

    def run(c):
        rng = np.random.Generator(np.random.PCG64(seeds[c]))
        if c == 0:
            start = np.arange(n)
        elif c == 1:
            start = _row_classes(rows)
        else:
            start = _canon(rng.integers(0, max(2, n // (c + 1)), n))
        return _anneal_chain(rows, start, rng, schedule, level >= LadderLevel.ENDOGENOUS, leak_tol)

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            found = list(pool.map(run, range(chains)))
    else:
        found = [run(c) for c in range(chains)]
    best_val, best_lab, total = -math.inf, None, 0
    for val, lab, ev in found:
        total += ev
        if val > best_val + TIE_TOL or (abs(val - best_val) <= TIE_TOL and _key(lab) < _key(best_lab)):
            best_val, best_lab = val, lab
    return best_val, best_lab, total


def anneal_search(
    system: Tpm | GateNetwork,
    level: int = LadderLevel.COARSE,
    seed: int = 42,
    schedule: AnnealSchedule = AnnealSchedule(),
    chains: int = 4,
    threads: int = 1,
    leak_tol: float = LEAK_TOL,
) -> SearchResult:
    """Simulated annealing over model choices for systems too large to enumerate.

    Moves merge two macrostates, split one, move a single state, and (from
    level 2) toggle a state between endogenous and exogenous. Chain 0 starts
    at the micro model, chain 1 at the grouping of states with identical
    transition rows, the others at random groupings. Bit-reproducible for
    a fixed seed and chain count regardless of ``threads``. At level 3 the
    element roles are annealed as well, with partition moves over the
    endogenous joint states.
    """
    level = LadderLevel(level)
    t, net = _as_tpm(system)
    if level == LadderLevel.ELEMENT and net is None:
        raise ValueError("ladder level 3 needs an element network")
    if level == LadderLevel.MICRO:
        return _finish(t, net, ModelChoice.identity(t.n), 1, "annealing", 0, level)
    state_level = min(level, LadderLevel.ENDOGENOUS)
    val, lab, evaluated = _anneal_rows(t.rows, state_level, seed, schedule, chains, threads, leak_tol)
    endo = tuple(np.flatnonzero(lab >= 0).tolist())
    best = _Best()
    choice = ModelChoice(endo, Partition(tuple(lab[lab >= 0].tolist())))
    best.offer(val, choice)
    if level == LadderLevel.ELEMENT:
        found, n_elem = _anneal_elements(net, t, seed, schedule)
        evaluated += n_elem
        if found is not None:
            best.offer(*found)
    return _finish(t, net, best.choice, evaluated, "annealing", 0, level)


def _anneal_elements(net, micro, seed, schedule):
    """Anneal element roles; each role assignment gets a short partition anneal."""
    N = net.N
    ss = np.random.SeedSequence([seed, 3])
    rng = np.random.Generator(np.random.PCG64(ss))
    roles = np.zeros(N, dtype=np.int64)
    best = _Best()
    evaluated = 0
    temp = schedule.t0
    inner = AnnealSchedule(schedule.t0, schedule.cooling, max(schedule.steps // 20, 50))
    cache: dict[tuple, tuple[float, ElementChoice]] = {}

    def score(rl):
        nonlocal evaluated
        key = tuple(rl.tolist())
        if key not in cache:
            ec = ElementChoice(
                tuple(i for i in range(N) if rl[i] == 0),
                {i: int(rl[i]) - 1 for i in range(N) if rl[i] in (1, 2)},
                tuple(i for i in range(N) if rl[i] == 3),
            )
            reduced, _ = reduce_micro(micro, N, ec)
            sub_seed = int(np.random.SeedSequence([seed, 3, *key]).generate_state(1)[0])
            val, lab, ev = _anneal_rows(reduced, LadderLevel.COARSE, sub_seed, inner, 1, 1, LEAK_TOL)
            evaluated += ev
            full = ElementChoice(ec.endogenous, ec.frozen, ec.blackboxed, Partition(tuple(lab.tolist())))
            cache[key] = (val, full)
            best.offer(val, full)
        return cache[key][0]

    cur_val = score(roles)
    for _ in range(max(schedule.steps // 20, 20)):
        cand = roles.copy()
        cand[rng.integers(N)] = rng.integers(4)
        if not (cand == 0).any():
            continue
        val = score(cand)
        temp *= schedule.cooling
        if val >= cur_val or rng.random() < math.exp((val - cur_val) / max(temp, 1e-300)):
            roles, cur_val = cand, val
    if best.choice is None:
        return None, evaluated
    return (best.value, best.choice), evaluated


# --- ladder ---------------------------------------------------------------


@dataclass
class LadderRow:
    level: int
    ei_max: float
    capacity: float
    emd: float
    choices_evaluated: int
    warped_id: np.ndarray = field(repr=False)
    best_choice: Choice | None = field(default=None, repr=False)

    def to_dict(self) -> dict[str, Any]:
        return {
            "level": self.level,
            "ei_max": self.ei_max,
            "capacity": self.capacity,
            "emd": self.emd,
            "choices_evaluated": self.choices_evaluated,
            "warped_id": self.warped_id.tolist(),
            "best_choice": self.best_choice.to_dict() if self.best_choice else None,
        }


def ladder_report(
    system: Tpm | GateNetwork,
    max_level: int | None = None,
    budget: float = DEFAULT_BUDGET,
    anneal: bool = False,
    seed: int = 42,
    threads: int = 1,
    leak_tol: float = LEAK_TOL,
) -> list[LadderRow]:
    """Best EI per ladder level with the EMD from its warped intervention to the
    capacity-achieving input.

    ``max_level`` defaults to 3 for element networks and 2 otherwise.
    """
    t, net = _as_tpm(system)
    if max_level is None:
        max_level = 3 if net is not None else 2
    cap = blahut_arimoto(t)
    out = []
    for level in range(max_level + 1):
        if anneal and level > 0:
            res = anneal_search(system, level, seed=seed, threads=threads, leak_tol=leak_tol)
        else:
            res = exhaustive_search(system, level, budget=budget, threads=threads, leak_tol=leak_tol)
        out.append(
            LadderRow(
                level=level,
                ei_max=res.best_ei,
                capacity=cap.capacity,
                emd=emd(res.warped_id, cap.optimal_input),
                choices_evaluated=res.evaluated,
                warped_id=res.warped_id,
                best_choice=res.best_choice,
            )
        )
    return out


def ladder_csv(rows: Sequence[LadderRow]) -> str:
    from .io import format_float

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["level", "ei_max", "capacity", "emd", "choices_evaluated"])
    for r in rows:
        w.writerow([r.level, format_float(r.ei_max), format_float(r.capacity), format_float(r.emd), r.choices_evaluated])
    return buf.getvalue()
