"""Channel capacity of a TPM and how much of it model choices recover."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any, Iterable, Sequence

import numpy as np

from .errors import EmergenceError, IndivisibleMessage, NotConverged
from .measures import ei
from .model_space import ModelChoice, macro_ei, warped_intervention
from .tpm import Tpm, as_dist, uniform



@dataclass(frozen=True)
class CapacityResult:
    capacity: float
    optimal_input: np.ndarray
    iterations: int
    converged: bool

    def to_dict(self) -> dict[str, Any]:
        return {
            "capacity": self.capacity,
            "optimal_input": self.optimal_input.tolist(),
            "iterations": self.iterations,
            "converged": self.converged,
        }


@dataclass(frozen=True)
class CodingResult:
    rate: float
    symbol_error_rate: float
    transitions_used: int
    errors: int = 0

    def to_dict(self) -> dict[str, Any]:
        return {
            "rate": self.rate,
            "symbol_error_rate": self.symbol_error_rate,
            "transitions_used": self.transitions_used,
            "errors": self.errors,
        }


def mutual_information(t: Tpm, p: Sequence[float] | np.ndarray) -> float:
    return ei(t, p)


def _row_divergences(rows: np.ndarray, q: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where((rows > 0) & (q > 0), rows * (np.log2(rows) - np.log2(q)), 0.0)
    return terms.sum(axis=1)


def blahut_arimoto(
    t: Tpm, tol: float = 1e-10, max_iter: int = 100_000, accelerate: bool = True
) -> CapacityResult:
    """Capacity by Blahut-Arimoto alternating maximization from the uniform input.

    Stops once the gap between the upper bound ``max_x D(p(y|x) || q)`` and
    the lower bound ``I(p; Y)`` falls below ``tol``. With ``accelerate`` the
    multiplicative update ``p * 2**(mu * D)`` uses an adaptive exponent
    ``mu >= 1``, grown while the mutual information keeps rising and cut back
    toward the plain step (``mu = 1``, always monotone) when it does not.
    This matters for near-useless channels, where the plain update contracts
    very slowly.

    Raises:
        NotConverged: ``max_iter`` reached; ``.result`` has the last iterate.
    """
    rows = t.rows
    p = uniform(t.n)
    d = _row_divergences(rows, p @ rows)
    lower = float(p @ d)
    mu = 1.0
    for it in range(1, max_iter + 1):
        upper = float(d.max())
        if upper - lower < tol:
            return CapacityResult(max(lower, 0.0), p, it, True)
        step = mu if accelerate else 1.0
        while True:
            cand = p * np.exp2(step * (d - upper))
            cand /= cand.sum()
            d_c = _row_divergences(rows, cand @ rows)
            low_c = float(cand @ d_c)
            if low_c >= lower or step == 1.0:
                break
            step = max(1.0, step / 4)
        mu = min(step * 2, 1e6) if step == mu else step
        p, d, lower = cand, d_c, low_c
    result = CapacityResult(max(lower, 0.0), p, max_iter, False)
    raise NotConverged(result, f"Blahut-Arimoto gap above {tol:g} after {max_iter} iterations")


def _batch_mi(rows: np.ndarray, P: np.ndarray) -> np.ndarray:
    """Mutual information for each input distribution in the rows of ``P``."""
    Q = P @ rows
    with np.errstate(divide="ignore", invalid="ignore"):
        h_y = -np.where(Q > 0, Q * np.log2(Q), 0.0).sum(axis=1)
        h_row = -np.where(rows > 0, rows * np.log2(rows), 0.0).sum(axis=1)
    return h_y - P @ h_row


def _hill_climb(rows: np.ndarray, p: np.ndarray, steps: int, step: float) -> np.ndarray:
    # exponentiated-gradient ascent on the simplex
    for _ in range(steps):
        q = p @ rows
        grad = _row_divergences(rows, q)
        cand = p * np.exp(step * (grad - grad.max()))
        cand /= cand.sum()
        if _batch_mi(rows, cand[None])[0] < _batch_mi(rows, p[None])[0]:
            step /= 2
            if step < 1e-6:
                break
            continue
        p = cand
    return p


def capacity_random_search(
    t: Tpm,
    samples: int = 100_000,
    seed: int = 0,
    batch: int = 4096,
    climb_steps: int = 500,
    threads: int = 1,
) -> CapacityResult:
    """Capacity estimate from seeded random inputs followed by local ascent.

    Draws ``samples`` inputs from symmetric Dirichlet distributions with
    concentrations cycling through 1, 0.3 and 0.1 (the smaller ones reach
    sparse inputs), keeps the best, then refines it by exponentiated-gradient
    ascent. Each batch has its own child seed, so results do not depend on
    ``threads``.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    rows = t.rows
    n_batches = -(-samples // batch)
    seeds = np.random.SeedSequence(seed).spawn(n_batches)
    alphas = (1.0, 0.3, 0.1)

    def run(b: int) -> tuple[float, np.ndarray]:
        rng = np.random.Generator(np.random.PCG64(seeds[b]))
        size = min(batch, samples - b * batch)
        P = rng.dirichlet(np.full(t.n, alphas[b % len(alphas)]), size=size)
        if b == 0:
            P[0] = uniform(t.n)
        mi = _batch_mi(rows, P)
        k = int(np.argmax(mi))
        return float(mi[k]), P[k]

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            found = list(pool.map(run, range(n_batches)))
    else:
        found = [run(b) for b in range(n_batches)]
    best_val, best_p = found[0]
    for val, p in found[1:]:
        if val > best_val:
            best_val, best_p = val, p
    p = _hill_climb(rows, best_p, climb_steps, step=1.0)
    val = float(_batch_mi(rows, p[None])[0])
    return CapacityResult(max(val, 0.0), p, samples + climb_steps, True)


def causal_capacity(t: Tpm, choices: Iterable[ModelChoice]) -> tuple[float, ModelChoice, np.ndarray]:
    """Best macro EI among ``choices``.

    Ties go to the choice with fewer macrostates, then the smaller
    restricted-growth string, then the smaller endogenous set.
    """
    best: tuple[float, ModelChoice] | None = None
    for c in choices:
        val = macro_ei(t, c).ei
        if best is None or val > best[0] + 1e-12 or (
            abs(val - best[0]) <= 1e-12 and c.sort_key() < best[1].sort_key()
        ):
            best = (val, c)
    if best is None:
        raise ValueError("causal_capacity needs at least one model choice")
    return best[0], best[1], warped_intervention(best[1], t.n)


def emergence_gap(t: Tpm, choices: Iterable[ModelChoice], capacity: CapacityResult | None = None) -> dict[str, Any]:
    micro = ei(t)
    choices = list(choices)
    if not any(c.is_identity(t.n) for c in choices):
        choices.append(ModelChoice.identity(t.n))
    cc, best, warped = causal_capacity(t, choices)
    if capacity is None:
        capacity = blahut_arimoto(t)
    return {
        "micro_ei": micro,
        "cc": cc,
        "capacity": capacity.capacity,
        "emergence": cc - micro,
        "capacity_gap": max(capacity.capacity - cc, 0.0),
        "best_choice": best.to_dict(),
        "warped_id": warped.tolist(),
    }


def is_weakly_symmetric(t: Tpm, tol: float = 1e-9) -> bool:
    """True iff all rows are permutations of row 0 and all column sums agree."""
    ref = np.sort(t.rows[0])
    if not np.all(np.abs(np.sort(t.rows, axis=1) - ref) <= tol):
        return False
    cols = t.rows.sum(axis=0)
    return bool(np.ptp(cols) <= tol * t.n)


def _code_layout(t: Tpm, choice: ModelChoice | None) -> tuple[int, np.ndarray, np.ndarray]:
    """Bits per symbol, channel input for each symbol, decoded symbol per output."""
    if choice is None or choice.is_identity(t.n):
        k = int(math.floor(math.log2(t.n))) if t.n > 1 else 0
        inputs = np.arange(2**k)
        decode = np.arange(t.n)
        decode[decode >= 2**k] = -1
    else:
        k = int(math.floor(math.log2(choice.m))) if choice.m > 1 else 0
        blocks = choice.macro_blocks()
        inputs = np.array([min(blocks[j]) for j in range(2**k)])
        decode = choice.labels(t.n)
        decode[decode >= 2**k] = -1
    if k == 0:
        raise EmergenceError("code has fewer than two symbols; nothing can be sent")
    return k, inputs, decode


def exact_symbol_error(t: Tpm, choice: ModelChoice | None = None, symbol_probs=None) -> float:
    """Probability that a decoded symbol differs from the sent one."""
    k, inputs, decode = _code_layout(t, choice)
    probs = uniform(2**k) if symbol_probs is None else as_dist(symbol_probs)
    correct = np.array([t.rows[x][decode == s].sum() for s, x in enumerate(inputs)])
    return float(probs @ (1.0 - correct))


def simulate_coding(
    t: Tpm,
    choice: ModelChoice | None,
    message_bits: str,
    seed: int = 0,
) -> CodingResult:
    """Send a bit string through ``t`` with a micro or macro code.

    The micro code maps each ``floor(log2 n)``-bit chunk to one state. The
    macro code maps each ``floor(log2 m)``-bit chunk to a macrostate, sent
    as that macrostate's lowest-index member and decoded by membership.
    Chunks are read big-endian.
    """
    k, inputs, decode = _code_layout(t, choice)
    bits = message_bits.strip()
    if any(b not in "01" for b in bits):
        raise ValueError("message must be a string of 0/1 characters")
    if len(bits) % k:
        raise IndivisibleMessage(f"{len(bits)} bits do not split into {k}-bit symbols")
    symbols = np.array([int(bits[i : i + k], 2) for i in range(0, len(bits), k)], dtype=np.int64)
    rng = np.random.Generator(np.random.PCG64(seed))
    cdf = np.cumsum(t.rows[inputs[symbols]], axis=1)
    cdf /= cdf[:, -1:]
    draws = rng.random(len(symbols))
    outputs = np.minimum((cdf < draws[:, None]).sum(axis=1), t.n - 1)
    errors = int(np.sum(decode[outputs] != symbols))
    n_sym = len(symbols)
    return CodingResult(
        rate=float(k),
        symbol_error_rate=errors / n_sym if n_sym else 0.0,
        transitions_used=n_sym,
        errors=errors,
    )


def random_message(n_bits: int, seed: int = 0) -> str:
    rng = np.random.Generator(np.random.PCG64(seed))
    return "".join("1" if b else "0" for b in rng.integers(0, 2, n_bits))
