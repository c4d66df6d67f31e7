import math
import warnings
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from restrictlab.exponents import (
    baselines,
    hermite_exponent,
    parse_q,
    predict,
    rho,
    transverse_exponent,
)


def test_rho_paper_values():
    assert rho(2, 1) == Fraction(1, 6)
    assert rho(2, 2) == Fraction(1, 5)
    assert rho(2, 3) == Fraction(3, 14)
    assert rho(2, "inf") == Fraction(1, 4)
    for s in (1, 2, 3, 10):
        assert rho(4, s) == Fraction(1, 4)


@given(st.integers(2, 400).map(lambda n: Fraction(n, 100)).filter(lambda q: 2 <= q <= 4))
@settings(max_examples=40, deadline=None)
def test_rho_sigma_one_matches_curved_baseline(q):
    assert rho(q, 1) == Fraction(1, 3) - Fraction(1, 3) / q


def test_rho_monotone_in_sigma():
    for q in (Fraction(2), Fraction(3), Fraction(7, 2)):
        vals = [rho(q, s) for s in range(1, 30)]
        assert all(a < b for a, b in zip(vals, vals[1:]))
    vals4 = [rho(4, s) for s in range(1, 30)]
    assert all(v == Fraction(1, 4) for v in vals4)


def test_rho_limit_quarter():
    assert abs(float(rho(2, 10**6)) - 0.25) < 1e-6
    # symbolically: 1/4 - rho(2, s) = 1/(4(2s+1))
    for s in (10, 100, 1000):
        assert Fraction(1, 4) - rho(2, s) == Fraction(1, 4 * (2 * s + 1))


def test_rho_closed_form_at_q2():
    for s in range(1, 20):
        assert rho(2, s) == Fraction(s, 2 * (2 * s + 1))


def test_sigma_nonpositive_routes_to_transverse():
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        val = rho(2, 0)
    assert val == transverse_exponent(2) == 0
    assert len(caught) >= 1


def test_out_of_range_q_warns():
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        rho(6, 1)
    assert len(caught) >= 1


def test_baselines_paper_values():
    b2 = baselines(2)
    assert b2["bgt_low"] == Fraction(1, 4)
    assert b2["bgt_curved"] == Fraction(1, 6)
    assert b2["tacy_transverse"] == 0
    b4 = baselines(4)
    assert b4["bgt_low"] == b4["bgt_high"] == Fraction(1, 4)
    assert baselines(math.inf)["bgt_high"] == Fraction(1, 2)


def test_hermite_exponent_values():
    assert hermite_exponent(2, 1) == Fraction(-1, 6)
    assert hermite_exponent(2, "inf") == 0
    assert hermite_exponent(4, 1) == Fraction(-1, 4)


def test_parse_q_forms():
    assert parse_q("7/2") == Fraction(7, 2)
    assert parse_q("inf") == math.inf
    assert parse_q(2) == Fraction(2)
    assert parse_q(3.5) == Fraction(7, 2)


def test_predict_row():
    row = predict("2", "1").row()
    assert row["rho"] == "1/6"
    assert row["hermite"] == "-1/6"
    assert math.isclose(row["rho_float"], 1 / 6)


def test_prediction_invariant_range():
    for q in (Fraction(2), Fraction(3), Fraction(4)):
        for s in (1, 2, 5):
            v = rho(q, s)
            assert Fraction(1, 6) - Fraction(1, 100) <= v <= Fraction(1, 4)
