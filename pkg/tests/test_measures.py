from math import log2

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from conftest import tpms
from emergence_lab import fixtures
from emergence_lab.errors import DistributionError, StateOutsideSupport
from emergence_lab.measures import (
    conditional_entropy_xy,
    degeneracy,
    determinism,
    effect_distribution,
    effect_information,
    ei,
    full_report,
)
from emergence_lab.tpm import uniform, validate_tpm

ABSORBING_EI = (7 * log2(8 / 7) + 3) / 8


def test_effect_distribution(absorbing8, exogenous8):
    assert np.allclose(effect_distribution(absorbing8), uniform(8), atol=1e-15)
    assert np.array_equal(effect_distribution(absorbing8, np.eye(8)[3]), absorbing8.rows[3])
    warped = [0] * 6 + [0.5, 0.5]
    assert np.allclose(effect_distribution(exogenous8, warped), warped)


def test_effect_information(absorbing8, m1, m3):
    assert effect_information(absorbing8, 7) == pytest.approx(3.0, abs=1e-12)
    for i in range(4):
        assert effect_information(m3, i) == pytest.approx(0.0, abs=1e-12)
        assert effect_information(m1, i) == pytest.approx(2.0, abs=1e-12)


def test_effect_information_outside_support(m1):
    with pytest.raises(StateOutsideSupport):
        effect_information(m1, 0, [0, 0.5, 0.5, 0])


def test_length_mismatch(m1):
    with pytest.raises(DistributionError):
        ei(m1, uniform(3))


@pytest.mark.parametrize("name, expected", [("m1", 2.0), ("m2", 1.0), ("m3", 0.0)])
def test_chain_examples(name, expected):
    assert ei(getattr(fixtures, name)()) == pytest.approx(expected, abs=1e-9)


def test_absorbing_ei(absorbing8):
    assert ei(absorbing8) == pytest.approx(ABSORBING_EI, abs=1e-12)
    assert ei(absorbing8) == pytest.approx(0.55, abs=1e-2)


def test_hetero_ei(hetero8):
    assert ei(hetero8) == pytest.approx(0.81, abs=5e-3)


def test_decomposition_values(m1, m2, m3):
    assert determinism(m1) == pytest.approx(1.0)
    assert determinism(m2) == pytest.approx((2 * log2(4 / 3) + 4) / 8, abs=1e-12)
    assert determinism(m3) == pytest.approx(0.0, abs=1e-12)
    assert degeneracy(m1) == pytest.approx(0.0, abs=1e-12)
    e_d = [1 / 6] * 3 + [1 / 2]
    expected = sum(p * log2(p / 0.25) for p in e_d) / 2
    assert degeneracy(m2) == pytest.approx(expected, abs=1e-12)
    assert round(degeneracy(m2), 4) == 0.1038


def test_full_report(absorbing8, m2):
    r = full_report(absorbing8)
    assert r.effectiveness == pytest.approx(0.1812, abs=1e-4)
    assert r.determinism == pytest.approx(r.effectiveness, abs=1e-12)
    assert r.degeneracy == pytest.approx(0.0, abs=1e-12)
    assert r.size == 3.0 and r.intervention_entropy == pytest.approx(3.0)
    r2 = full_report(m2)
    assert r2.effectiveness == pytest.approx(0.5, abs=1e-12)
    assert r2.ei == pytest.approx(1.0, abs=1e-12)
    r3 = full_report(validate_tpm(np.eye(2)))
    assert (r3.ei, r3.effectiveness) == (1.0, 1.0)


def test_single_state_system():
    r = full_report(validate_tpm([[1.0]]))
    assert (r.ei, r.size, r.effectiveness) == (0.0, 0.0, 0.0)


def test_report_json_keys(m2):
    keys = set(full_report(m2).to_dict())
    assert keys == {"ei", "eff", "determinism", "degeneracy", "size", "intervention_entropy", "effect_info"}


@given(tpms(min_n=2, max_n=7))
def test_ei_is_mutual_information(t):
    n = t.n
    assert ei(t) == pytest.approx(oracles.mutual_information(t.rows.tolist(), [1 / n] * n), abs=1e-9)


@given(tpms(min_n=2, max_n=6), st.data())
def test_ei_is_mutual_information_any_input(t, data):
    raw = data.draw(st.lists(st.floats(0.0, 1.0), min_size=t.n, max_size=t.n).filter(lambda v: sum(v) > 1e-3))
    p = [v / sum(raw) for v in raw]
    assert ei(t, p) == pytest.approx(oracles.mutual_information(t.rows.tolist(), p), abs=1e-9)


@given(tpms(min_n=2, max_n=7))
def test_size_times_effectiveness(t):
    r = full_report(t)
    assert r.ei == pytest.approx(r.size * (r.determinism - r.degeneracy), abs=1e-9)
    assert 0 <= r.ei <= r.size + 1e-12


@given(tpms(min_n=2, max_n=7))
def test_conditional_entropy_is_lost_effectiveness(t):
    r = full_report(t)
    h = conditional_entropy_xy(t)
    assert h == pytest.approx((1 - r.effectiveness) * r.size, abs=1e-9)
    assert h == pytest.approx(oracles.conditional_entropy(t.rows.tolist(), [1 / t.n] * t.n), abs=1e-9)


@given(st.permutations(list(range(6))))
def test_permutation_has_full_effectiveness(perm):
    t = validate_tpm(np.eye(6)[list(perm)])
    assert full_report(t).effectiveness == pytest.approx(1.0, abs=1e-12)


@given(tpms(min_n=2, max_n=6))
def test_full_effectiveness_only_for_permutations(t):
    is_perm = np.all(np.isin(t.rows, (0.0, 1.0))) and np.all(t.rows.sum(axis=0) == 1.0)
    eff = full_report(t).effectiveness
    assert (abs(eff - 1.0) < 1e-9) == bool(is_perm)


@given(tpms(min_n=2, max_n=6), tpms(min_n=2, max_n=6))
def test_scale_comparison_rule(a, b):
    ra, rb = full_report(a), full_report(b)
    if ra.effectiveness <= 1e-9 or abs(ra.ei - rb.ei) < 1e-9:
        return
    # EI = size * eff, so A wins exactly when eff_B / eff_A < size_A / size_B
    lhs = rb.effectiveness / ra.effectiveness
    rhs = ra.size / rb.size
    if abs(lhs - rhs) > 1e-9:
        assert (ra.ei > rb.ei) == (lhs < rhs)
