"""Named example systems, built from exact fractions."""

from __future__ import annotations

from fractions import Fraction as F
from typing import Callable

from .gates import GateNetwork, and_network
from .tpm import Tpm, validate_tpm


def _tpm(rows) -> Tpm:
    return validate_tpm([[float(F(x)) for x in row] for row in rows])


def m1() -> Tpm:
    return _tpm([[0, 0, 1, 0], [1, 0, 0, 0], [0, 0, 0, 1], [0, 1, 0, 0]])


def m2() -> Tpm:
    third = F(1, 3)
    return _tpm([[third] * 3 + [0]] * 2 + [[0, 0, 0, 1]] * 2)


def m3() -> Tpm:
    return _tpm([[F(1, 4)] * 4] * 4)


def absorbing8() -> Tpm:
    """Seven states mixing uniformly among themselves, one fixed point."""
    return _tpm([[F(1, 7)] * 7 + [0]] * 7 + [[0] * 7 + [1]])


def hetero8() -> Tpm:
    """Like :func:`absorbing8` but every one of the first seven rows differs."""
    f = F
    return _tpm(
        [
            [f(1, 5)] * 5 + [0, 0, 0],
            [f(1, 7), f(3, 7), f(1, 7), 0, f(1, 7), 0, f(1, 7), 0],
            [0] + [f(1, 6)] * 6 + [0],
            [f(1, 7), 0, f(1, 7), f(1, 7), f(1, 7), f(1, 7), f(2, 7), 0],
            [f(1, 9), f(2, 9), f(2, 9), f(1, 9), 0, f(2, 9), f(1, 9), 0],
            [f(1, 7)] * 7 + [0],
            [f(1, 6), f(1, 6), 0, f(1, 6), f(1, 6), f(1, 6), f(1, 6), 0],
            [0] * 7 + [1],
        ]
    )


def exogenous8() -> Tpm:
    """Six fully random states and two fixed points."""
    return _tpm([[F(1, 8)] * 8] * 6 + [[0] * 6 + [1, 0], [0] * 7 + [1]])


def coding4() -> Tpm:
    third = F(1, 3)
    return _tpm([[third] * 3 + [0]] * 3 + [[0, 0, 0, 1]])


def uniform8() -> Tpm:
    return _tpm([[F(1, 8)] * 8] * 8)


def permutation4() -> Tpm:
    return _tpm([[0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1], [1, 0, 0, 0]])


def bsc(flip: float = 0.25) -> Tpm:
    return validate_tpm([[1 - flip, flip], [flip, 1 - flip]])


def and2() -> GateNetwork:
    """Two AND gates, each reading both elements."""
    return and_network([(0, 1), (0, 1)])


def six_and() -> GateNetwork:
    """Three independent :func:`and2` pairs.

    One six-AND-gate wiring consistent with reported values (micro EI 2.43,
    eff 0.41, degeneracy 0.59, macro EI 3). Other wirings may match too.
    """
    return and_network([(0, 1), (0, 1), (2, 3), (2, 3), (4, 5), (4, 5)])


TPM_FIXTURES: dict[str, Callable[[], Tpm]] = {
    "m1": m1,
    "m2": m2,
    "m3": m3,
    "absorbing8": absorbing8,
    "hetero8": hetero8,
    "exogenous8": exogenous8,
    "coding4": coding4,
    "uniform8": uniform8,
    "permutation4": permutation4,
    "bsc": bsc,
}

NETWORK_FIXTURES: dict[str, Callable[[], GateNetwork]] = {"and2": and2, "six_and": six_and}
