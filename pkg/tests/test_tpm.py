from math import log2

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import tpms
from emergence_lab import io as fio
from emergence_lab.errors import (
    AbsoluteContinuityViolation,
    NegativeEntry,
    NonSquare,
    RowSumOutOfTolerance,
)
from emergence_lab.tpm import emd, entropy, kl_divergence, uniform, validate_tpm


def test_identity_is_valid():
    t = validate_tpm(np.eye(4))
    assert t.n == 4


def test_m2_is_valid(m2):
    assert m2.n == 4


def test_row_sum_error_reports_row():
    with pytest.raises(RowSumOutOfTolerance) as exc:
        validate_tpm([[1.0, 0.0], [0.5, 0.6]])
    assert exc.value.row == 1
    assert exc.value.total == pytest.approx(1.1)


def test_non_square_and_negative():
    with pytest.raises(NonSquare):
        validate_tpm([[1.0, 0.0]])
    with pytest.raises(NegativeEntry):
        validate_tpm([[1.5, -0.5], [0.0, 1.0]])


def test_rounding_noise_kept_verbatim():
    row = [1 / 7] * 7
    t = validate_tpm([row] * 7)
    assert t.rows[0].sum() != 1.0
    assert np.array_equal(t.rows[0], np.array(row))


def test_tolerance_boundary():
    validate_tpm([[0.5, 0.5 + 5e-10], [0.0, 1.0]])
    with pytest.raises(RowSumOutOfTolerance):
        validate_tpm([[0.5, 0.5 + 5e-9], [0.0, 1.0]])


@pytest.mark.parametrize(
    "d, expected",
    [
        (uniform(8), 3.0),
        ([0, 0, 1], 0.0),
        ([0, 0, 0, 0, 0, 0, 0.5, 0.5], 1.0),
    ],
)
def test_entropy(d, expected):
    assert entropy(d) == pytest.approx(expected, abs=1e-12)


def test_kl_examples():
    assert kl_divergence(uniform(8), uniform(8)) == 0.0
    delta = np.eye(8)[7]
    assert kl_divergence(delta, uniform(8)) == pytest.approx(3.0, abs=1e-12)
    seven = np.array([1 / 7] * 7 + [0])
    assert kl_divergence(seven, uniform(8)) == pytest.approx(log2(8 / 7), abs=1e-12)


def test_kl_absolute_continuity():
    with pytest.raises(AbsoluteContinuityViolation) as exc:
        kl_divergence([0.5, 0.5], [1.0, 0.0])
    assert exc.value.index == 1


def test_emd_examples():
    assert emd(uniform(4), uniform(4)) == 0.0
    assert emd([1, 0], [0, 1]) == 1.0
    warped = [0] * 6 + [0.5, 0.5]
    # half of six 1/8 masses plus two 3/8 gaps
    assert emd(uniform(8), warped) == pytest.approx(0.5 * (6 / 8 + 2 * 3 / 8), abs=1e-12)


dists = st.integers(1, 8).flatmap(
    lambda n: st.lists(st.floats(0.0, 1.0), min_size=n, max_size=n).filter(lambda v: sum(v) > 1e-3)
).map(lambda v: np.array(v) / sum(v))


@given(dists)
def test_entropy_bounded_by_log_n(p):
    assert -1e-12 <= entropy(p) <= log2(len(p)) + 1e-12


@given(dists, st.data())
def test_kl_nonnegative_zero_iff_equal(p, data):
    q_raw = data.draw(st.lists(st.floats(0.01, 1.0), min_size=len(p), max_size=len(p)))
    q = np.array(q_raw) / sum(q_raw)
    d = kl_divergence(p, q)
    assert d >= 0
    assert kl_divergence(p, p) == 0.0
    if np.abs(p - q).max() > 1e-6:
        assert d > 0


@given(st.integers(1, 6).flatmap(lambda n: st.tuples(*[st.lists(st.floats(0.0, 1.0), min_size=n, max_size=n).filter(lambda v: sum(v) > 1e-3)] * 3)))
def test_emd_metric(triple):
    p, q, r = (np.array(v) / sum(v) for v in triple)
    assert emd(p, q) == pytest.approx(emd(q, p), abs=1e-15)
    assert emd(p, r) <= emd(p, q) + emd(q, r) + 1e-12
    assert 0 <= emd(p, q) <= 1


@given(tpms(max_n=7))
def test_json_round_trip_is_bit_identical(t):
    back = fio.tpm_from_json(fio.tpm_to_json(t))
    assert np.array_equal(back.rows, t.rows)
    assert fio.tpm_to_json(back) == fio.tpm_to_json(t)


@given(tpms(max_n=5))
def test_csv_round_trip(t):
    assert np.array_equal(fio.tpm_from_csv(fio.tpm_to_csv(t)).rows, t.rows)


def test_csv_labels():
    t = fio.tpm_from_csv("a,b\n1,0\n0.25,0.75\n")
    assert t.labels == ("a", "b")
    assert t.rows[1, 1] == 0.75


@given(st.lists(st.lists(st.floats(0.0, 1.0), min_size=3, max_size=3), min_size=3, max_size=3))
def test_validate_accepts_exactly_stochastic(rows):
    ok = all(abs(sum(r) - 1.0) <= 1e-9 for r in rows)
    try:
        validate_tpm(rows)
        accepted = True
    except RowSumOutOfTolerance:
        accepted = False
    assert accepted == ok
