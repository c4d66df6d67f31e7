import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from restrictlab.jets import Dual, Taylor1d, gcos, gsin, gsqrt, implicit_jet, taylor_ode_jet


def test_sin_jet_matches_derivatives():
    t = Taylor1d.variable(0.3, 8)
    s = gsin(t)
    expect = [math.sin(0.3), math.cos(0.3), -math.sin(0.3), -math.cos(0.3)]
    for j in range(4):
        assert_allclose(s.derivative_value(j), expect[j], atol=1e-15)


def test_reciprocal_and_sqrt():
    t = Taylor1d.variable(2.0, 6)
    r = (t * t).reciprocal()
    # d/dx (1/x^2) = -2/x^3 at x=2
    assert_allclose(r.derivative_value(1), -2.0 / 8.0, rtol=1e-14)
    sq = gsqrt(t)
    assert_allclose(sq.derivative_value(1), 0.5 / math.sqrt(2.0), rtol=1e-14)
    assert_allclose(sq.derivative_value(2), -0.25 * 2.0 ** (-1.5), rtol=1e-13)


def test_division_by_zero_constant_raises():
    t = Taylor1d.variable(0.0, 4)
    with pytest.raises(ZeroDivisionError):
        t.reciprocal()


def test_composition():
    outer = gsqrt(Taylor1d.variable(2.0, 6))
    inner = Taylor1d(np.array([0.0, 1.0, 0.0, 1.0, 0.0, 0.0, 0.0]))  # s + s^3
    comp = outer.compose(inner.truncate(6))
    h = 1e-4
    num = (math.sqrt(2 + h + h**3) - math.sqrt(2 - h - h**3)) / (2 * h)
    assert_allclose(comp.derivative_value(1), num, rtol=1e-7)


def test_power_matches_repeated_multiplication():
    t = Taylor1d.variable(1.3, 5)
    assert_allclose((t**4).coeffs, (t * t * t * t).coeffs, rtol=1e-14)


def test_ode_jet_harmonic_oscillator():
    series = taylor_ode_jet(lambda st: [st[1], -st[0]], [1.0, 0.0], 10)
    # x(s) = cos s
    for j in range(10):
        expect = math.cos(j * math.pi / 2.0)
        assert_allclose(series[0].derivative_value(j), round(expect), atol=1e-12)


def test_implicit_jet_circle():
    def res(ts, ys):
        return [ys[0] * ys[0] + ts * ts - 1.0]

    ys = implicit_jet(res, Taylor1d.variable(0.0, 6), [1.0], [[2.0]], 6)
    # y = sqrt(1 - t^2) = 1 - t^2/2 - t^4/8 - t^6/16
    assert_allclose(ys[0].coeffs, [1, 0, -0.5, 0, -0.125, 0, -0.0625], atol=1e-14)


def test_nested_dual_mixed_partial():
    x = Dual(Dual(3.0, 1.0), Dual(0.0, 0.0))
    y = Dual(Dual(2.0, 0.0), Dual(1.0, 0.0))
    val = x * x * y
    assert_allclose(val.b.b, 6.0)  # d^2/dxdy x^2 y = 2x


def test_dual_division_and_trig():
    x = Dual(0.7, 1.0)
    f = gsin(x) / gcos(x)  # tan
    assert_allclose(f.b, 1.0 / math.cos(0.7) ** 2, rtol=1e-14)
