import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from restrictlab.polynomials import (
    PolynomialExact,
    check_critical_values,
    check_wp_identities,
    count_real_roots,
    p_sigma,
    p_sigma_float,
    polylab_report,
    wp,
    wp_real_roots,
    wp_tilde,
)

rationals = st.fractions(min_value=-5, max_value=5).filter(lambda f: f.denominator <= 40)


def test_p_sigma_hand_values():
    assert p_sigma(1, 0, 3) == Fraction(9, 2)
    assert p_sigma(2, 1, 2) == Fraction(2, 3)


@given(rationals, st.integers(1, 8))
@settings(max_examples=50, deadline=None)
def test_p_sigma_vanishes_on_diagonal(u, sigma):
    assert p_sigma(sigma, u, u) == 0


@given(rationals, rationals, st.integers(1, 20))
@settings(max_examples=100, deadline=None)
def test_p_sigma_paths_agree(u, v, sigma):
    assert p_sigma(sigma, u, v, "sum") == p_sigma(sigma, u, v, "closed")


def test_p_sigma_float_close_to_exact():
    rng = random.Random(5)
    for _ in range(50):
        sigma = rng.randint(1, 6)
        u, v = rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5)
        exact = float(p_sigma(sigma, Fraction(u).limit_denominator(10**6), Fraction(v).limit_denominator(10**6)))
        assert math.isclose(p_sigma_float(sigma, u, v), exact, rel_tol=1e-9, abs_tol=1e-18)


def test_wp_small_cases():
    assert wp(1, 1).coeffs == (Fraction(1, 2),)
    assert wp(2, 1).coeffs == (Fraction(1, 6), Fraction(1, 2))
    assert wp(2, 2).coeffs == (Fraction(1, 3), Fraction(1, 2))
    assert wp(2, 1).eval(0) == Fraction(1, 6)
    assert wp(2, 1).eval(Fraction(-1, 2)) == Fraction(-1, 12)
    assert wp(3, 1).eval(Fraction(-1, 3)) == Fraction(1, 72)


@pytest.mark.parametrize("sigma", range(1, 41))
def test_wp_degree(sigma):
    assert wp(sigma, 1).degree == sigma - 1
    assert wp(sigma, 2).degree == sigma - 1


def test_identities_to_forty():
    rep = check_wp_identities(40)
    assert rep.all_ok, rep.failures


def test_mirror_identity_sigma_two_by_hand():
    # wp_{2,1}(tau) = (1+3tau)/6 and -wp_{2,2}(-tau-1) = (3tau+1)/6
    p2 = wp(2, 2)
    for tau in (Fraction(0), Fraction(1, 3), Fraction(-2, 5)):
        assert wp(2, 1).eval(tau) == -p2.eval(-tau - 1)


def test_derivative_ladder():
    assert wp(2, 1).derivative().coeffs == wp(1, 1).coeffs


@pytest.mark.parametrize("sigma", range(1, 41))
def test_root_counts(sigma):
    for branch in (1, 2):
        roots = wp_real_roots(sigma, branch)
        assert len(roots) == (0 if sigma % 2 == 1 else 1)


def test_sigma_two_roots_exact():
    (lo1, hi1, r1), = wp_real_roots(2, 1)
    (lo2, hi2, r2), = wp_real_roots(2, 2)
    assert abs(r1 + 1 / 3) < 1e-10
    assert abs(r2 + 2 / 3) < 1e-10


@pytest.mark.parametrize("sigma", [4, 6, 8, 20, 40])
def test_root_ordering_even(sigma):
    (_, _, t1), = wp_real_roots(sigma, 1)
    (_, _, t2), = wp_real_roots(sigma, 2)
    assert -1.0 < t2 < -0.5 < t1 < 0.0


@pytest.mark.parametrize("sigma", [3, 5, 7, 9, 11, 13, 15])
def test_odd_sigma_positive_lower_bound(sigma):
    # sampled positivity of branch 1 on [-10, 10]
    p = wp(sigma, 1)
    vals = [p.eval_float(-10 + 20 * i / 400) for i in range(401)]
    assert min(vals) > 0


@pytest.mark.parametrize("sigma", [3, 4, 5, 8])
def test_wp_tilde_vanishes_only_at_minus_one(sigma):
    for branch in (1, 2):
        pt = wp_tilde(sigma, branch)
        roots = [r for _, _, r in __import__("restrictlab.polynomials", fromlist=["real_roots"]).real_roots(pt)]
        # tau = -1 is always a root; any other real root would violate Lemma-type structure
        if sigma % 2 == 0:  # wp_{sigma-1,i} has odd inner index -> no extra roots
            assert len(roots) == 1 and abs(roots[0] + 1) < 1e-10
    # nonvanishing at the other branch's critical root
    if sigma % 2 == 0:
        (_, _, t1), = wp_real_roots(sigma, 1)
        assert abs(wp_tilde(sigma, 1).eval_float(t1)) > 1e-6


@pytest.mark.parametrize("sigma", [2, 3, 5, 8, 13])
def test_critical_values(sigma):
    rep = check_critical_values(sigma)
    assert rep.ok
    if sigma == 2:
        assert rep.n_critical == 0  # derivative is constant: vacuous


def test_sturm_count_interval():
    # (x-1)(x-2)(x+3) has 2 roots in (0, 2.5]
    p = PolynomialExact.make([6, -7, -2, 1])
    assert count_real_roots(p, 0, Fraction(5, 2)) == 2
    assert count_real_roots(p, -4, 3) == 3


def test_polylab_report_all_ok():
    rep = polylab_report(12)
    assert rep["all_ok"]
