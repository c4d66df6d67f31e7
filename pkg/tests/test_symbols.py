import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from restrictlab.errors import DomainError, ExtrapolationWarning, OrderError
from restrictlab.symbols import (
    PhaseSpacePoint,
    check_admissible,
    get_symbol,
    make_custom_symbol,
    parse_symbol_expression,
    symbol_derivative,
    transport_symbol,
)

TORUS = get_symbol("torus_laplace")
SPHERE = get_symbol("sphere_laplace")
HERMITE = get_symbol("hermite")


def test_eval_examples():
    assert TORUS.eval(PhaseSpacePoint([0, 0], [1, 0])) == 0.0
    assert HERMITE.eval(PhaseSpacePoint([0, 0], [1, 0])) == 0.0
    assert TORUS.eval(PhaseSpacePoint([0, 0], [2, 0])) == 3.0


def test_gradient_examples():
    pt = PhaseSpacePoint([0, 0], [1, 0])
    assert_allclose(TORUS.grad_xi(pt), [2, 0])
    assert_allclose(HERMITE.grad_x(PhaseSpacePoint([0.5, 0], [0.3, 0.4])), [1, 0])
    assert_allclose(TORUS.hess_xi(pt), 2 * np.eye(2))


def _fd_derivative(sym, pt, alpha, h=1e-4):
    # central differences, one variable at a time
    counts = list(alpha)
    var = next(i for i, c in enumerate(counts) if c > 0)
    counts[var] -= 1

    def at(shift):
        vals = list(pt.as_tuple())
        vals[var] += shift
        p2 = PhaseSpacePoint(vals[:2], vals[2:])
        if sum(counts) == 0:
            return sym.eval(p2, check_region=False)
        return sym.deriv(p2, tuple(counts))

    return (at(h) - at(-h)) / (2 * h)


@pytest.mark.parametrize("name", ["torus_laplace", "sphere_laplace", "hermite"])
def test_derivatives_match_finite_differences(name):
    sym = get_symbol(name)
    rng = np.random.default_rng(11)
    for _ in range(100):
        x = sym.region.position.center + 0.3 * (rng.random(2) - 0.5)
        xi = rng.uniform(0.4, 1.2, 2)
        pt = PhaseSpacePoint(x, xi)
        alpha = [0, 0, 0, 0]
        for _k in range(rng.integers(1, 4)):
            alpha[rng.integers(0, 4)] += 1
        exact = sym.deriv(pt, tuple(alpha))
        approx = _fd_derivative(sym, pt, tuple(alpha))
        assert abs(exact - approx) <= 1e-6 * max(1.0, abs(exact))


def test_derivative_order_cap():
    with pytest.raises(OrderError):
        TORUS.deriv(PhaseSpacePoint([0, 0], [1, 0]), (13, 0, 0, 0))


@given(st.permutations([0, 2, 2, 3]))
@settings(max_examples=20, deadline=None)
def test_multi_index_permutation_invariance(seq):
    pt = PhaseSpacePoint([1.1, 0.2], [0.5, 0.8])
    base = SPHERE.deriv(pt, (1, 0, 1, 2))
    assert_allclose(SPHERE.deriv(pt, tuple(seq) + (1,)), SPHERE.deriv(pt, (seq[0], seq[1], seq[2], seq[3], 1)), rtol=1e-12)
    # order of differentiation does not matter
    assert_allclose(SPHERE.deriv(pt, [0, 2, 3, 3]), base, rtol=1e-10)


def test_region_extrapolation_warns():
    pt = PhaseSpacePoint([50.0, 0.0], [1.0, 0.0])
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        TORUS.eval(pt)
    assert any(issubclass(w.category, ExtrapolationWarning) for w in caught)


def test_admissibility_flat_and_hermite():
    rep = check_admissible(TORUS, 3, 16)
    assert rep.admissible
    assert_allclose(rep.a1_min, 2.0, atol=1e-9)
    assert_allclose(rep.a2_min, 2.0, atol=1e-9)
    rep_h = check_admissible(HERMITE, 5, 16)
    assert rep_h.admissible
    assert rep_h.a2_min >= 1.0


def test_admissibility_sphere():
    rep = check_admissible(SPHERE, 4, 16)
    assert rep.admissible


def test_degenerate_symbol_fails_a2():
    deg = make_custom_symbol("xi1")
    rep = check_admissible(deg, 3, 32)
    assert not rep.a2_pass
    assert rep.a2_min == 0.0


def test_expression_parser():
    fn = parse_symbol_expression("xi1^2 + xi2^2 - 1 + 0.5*x1*xi2")
    assert fn(1.0, 0.0, 1.0, 1.0) == 1.5
    fn2 = parse_symbol_expression("(x1 + x2)^2 / 2 - xi1^-1")
    assert_allclose(fn2(1.0, 2.0, 4.0, 0.0), 4.5 - 0.25)
    with pytest.raises(ValueError):
        parse_symbol_expression("x1 + y")
    with pytest.raises(ValueError):
        parse_symbol_expression("x1 ** 2")
    with pytest.raises(ValueError):
        parse_symbol_expression("(x1 + 1")


def test_custom_symbol_derivatives():
    sym = make_custom_symbol("xi1^2 + xi2^2 - 1 + 0.5*x1*xi2")
    pt = PhaseSpacePoint([1.0, 0.0], [1.0, 1.0])
    assert_allclose(sym.deriv(pt, (1, 0, 0, 0)), 0.5)
    assert_allclose(sym.deriv(pt, (1, 0, 0, 1)), 0.5)
    assert_allclose(symbol_derivative(sym, pt, (0, 0, 2, 0)), 2.0)


def test_non_finite_eval_raises():
    sym = make_custom_symbol("1/x1")
    with pytest.raises((DomainError, ZeroDivisionError)):
        sym.eval(PhaseSpacePoint([0.0, 0.0], [1.0, 0.0]), check_region=False)


def test_transport_symbol_consistency():
    from restrictlab.flow import Diffeo, cotangent_lift

    a = np.array([[1.2, 0.4], [-0.1, 0.9]])
    shift = np.array([0.03, -0.07])
    q = transport_symbol(TORUS, a, shift)
    pt = PhaseSpacePoint([0.1, -0.2], [0.8, 0.55])
    lifted = cotangent_lift(Diffeo.linear(a, shift), pt)
    assert_allclose(q.eval(lifted, check_region=False), TORUS.eval(pt, check_region=False), atol=1e-14)
