import numpy as np
import pytest
from hypothesis import given, settings

import oracles
from conftest import random_tpm, random_weakly_symmetric, tpms
from emergence_lab import fixtures
from emergence_lab.capacity import (
    blahut_arimoto,
    capacity_random_search,
    causal_capacity,
    emergence_gap,
    exact_symbol_error,
    is_weakly_symmetric,
    random_message,
    simulate_coding,
)
from emergence_lab.errors import IndivisibleMessage, NotConverged
from emergence_lab.measures import ei
from emergence_lab.model_space import ModelChoice
from emergence_lab.search import level_choices
from emergence_lab.tpm import uniform, validate_tpm

MACRO_CODE = ModelChoice.coarse([[0, 1, 2], [3]], 4)


@pytest.mark.parametrize(
    "name, expected",
    [("coding4", 1.0), ("permutation4", 2.0), ("uniform8", 0.0), ("absorbing8", 1.0), ("m2", 1.0)],
)
def test_blahut_arimoto_known_capacities(name, expected):
    res = blahut_arimoto(getattr(fixtures, name)())
    assert res.converged
    assert res.capacity == pytest.approx(expected, abs=1e-6)


def test_bsc_capacity():
    for flip in (0.1, 0.25, 0.4):
        res = blahut_arimoto(fixtures.bsc(flip))
        assert res.capacity == pytest.approx(1 - oracles.binary_entropy(flip), abs=1e-9)
        assert np.allclose(res.optimal_input, [0.5, 0.5])


def test_optimal_input_achieves_capacity(exogenous8):
    res = blahut_arimoto(exogenous8)
    assert ei(exogenous8, res.optimal_input) == pytest.approx(res.capacity, abs=1e-9)


def test_not_converged_carries_result(hetero8):
    with pytest.raises(NotConverged) as info:
        blahut_arimoto(hetero8, tol=1e-15, max_iter=3)
    assert info.value.result.iterations == 3
    assert not info.value.result.converged


@settings(max_examples=30)
@given(tpms(min_n=2, max_n=6))
def test_capacity_bounds_ei(t):
    cap = blahut_arimoto(t).capacity
    assert ei(t) <= cap + 1e-6
    assert cap <= np.log2(t.n) + 1e-9


def test_random_search_brackets_capacity():
    rng = np.random.default_rng(7)
    for _ in range(5):
        t = random_tpm(rng, 5)
        ba = blahut_arimoto(t).capacity
        rs = capacity_random_search(t, samples=5000, seed=1)
        assert rs.capacity <= ba + 1e-9
        assert rs.capacity == pytest.approx(ba, abs=1e-4)


def test_random_search_reproducible_across_threads(hetero8):
    a = capacity_random_search(hetero8, samples=20000, seed=3, threads=1)
    b = capacity_random_search(hetero8, samples=20000, seed=3, threads=4)
    assert a.capacity == b.capacity
    assert np.array_equal(a.optimal_input, b.optimal_input)


def test_weakly_symmetric_uniform_optimum():
    rng = np.random.default_rng(11)
    for _ in range(20):
        t = random_weakly_symmetric(rng, int(rng.integers(2, 7)))
        assert is_weakly_symmetric(t)
        res = blahut_arimoto(t)
        assert res.capacity == pytest.approx(ei(t), abs=1e-9)
    assert not is_weakly_symmetric(fixtures.absorbing8())


def test_causal_capacity_ties_and_bound(coding4):
    cc, best, warped = causal_capacity(coding4, level_choices(coding4, 1))
    assert cc == pytest.approx(1.0, abs=1e-12)
    assert best.m == 2
    assert cc <= blahut_arimoto(coding4).capacity + 1e-9
    assert np.allclose(warped, [1 / 6] * 3 + [0.5])


def test_causal_capacity_over_levels_is_monotone(exogenous8):
    values = [causal_capacity(exogenous8, level_choices(exogenous8, lv))[0] for lv in (0, 1, 2)]
    assert values == sorted(values)
    assert values[-1] <= blahut_arimoto(exogenous8).capacity + 1e-9


def test_emergence_gap(absorbing8):
    gap = emergence_gap(absorbing8, level_choices(absorbing8, 1))
    assert gap["micro_ei"] == pytest.approx(0.5435644, abs=1e-6)
    assert gap["cc"] == pytest.approx(1.0, abs=1e-12)
    assert gap["emergence"] == pytest.approx(0.4564, abs=1e-3)
    assert gap["capacity_gap"] == pytest.approx(0.0, abs=1e-6)


def test_macro_code_is_error_free(coding4):
    msg = random_message(20000, seed=5)
    res = simulate_coding(coding4, MACRO_CODE, msg, seed=9)
    assert res.errors == 0 and res.symbol_error_rate == 0.0
    assert res.rate == 1.0 and res.transitions_used == 20000


def test_micro_code_error_within_three_sigma(coding4):
    n_sym = 20000
    res = simulate_coding(coding4, None, random_message(2 * n_sym, seed=5), seed=9)
    p = exact_symbol_error(coding4)
    assert p == pytest.approx(0.5, abs=1e-12)
    sigma = np.sqrt(p * (1 - p) / n_sym)
    assert abs(res.symbol_error_rate - p) <= 3 * sigma
    assert res.rate == 2.0


def test_coding_is_seeded(coding4):
    msg = random_message(1000, seed=1)
    assert simulate_coding(coding4, None, msg, seed=2) == simulate_coding(coding4, None, msg, seed=2)


def test_noiseless_channel_sends_message_verbatim():
    t = validate_tpm(np.eye(4))
    assert simulate_coding(t, None, "0110110001", seed=0).errors == 0


def test_indivisible_message(coding4):
    with pytest.raises(IndivisibleMessage):
        simulate_coding(coding4, None, "101", seed=0)
    with pytest.raises(ValueError):
        simulate_coding(coding4, None, "10a1", seed=0)


def test_non_power_of_two_micro_code():
    t = validate_tpm(np.eye(3))
    res = simulate_coding(t, None, "0101", seed=0)
    assert res.rate == 1.0 and res.errors == 0
    assert exact_symbol_error(t, None, uniform(2)) == 0.0


def test_accelerated_update_on_near_useless_channel():
    # rows nearly identical: the plain update contracts very slowly here
    t = validate_tpm([[0.2666, 0.4054, 0.328], [0.2493, 0.4186, 0.3321], [0.2889, 0.5297, 0.1814]])
    fast = blahut_arimoto(t)
    with pytest.raises(NotConverged):
        blahut_arimoto(t, accelerate=False, max_iter=20_000)
    slow = blahut_arimoto(t, accelerate=False, max_iter=400_000)
    assert fast.iterations < slow.iterations
    assert fast.capacity == pytest.approx(slow.capacity, abs=1e-9)
