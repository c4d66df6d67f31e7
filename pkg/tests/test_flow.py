import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from restrictlab.errors import DomainError
from restrictlab.flow import (
    Diffeo,
    cotangent_lift,
    flow_jacobian_fd,
    flow_jet,
    flow_jet_cross,
    integrate_flow,
)
from restrictlab.symbols import PhaseSpacePoint, get_symbol

TORUS = get_symbol("torus_laplace")
SPHERE = get_symbol("sphere_laplace")
HERMITE = get_symbol("hermite")


def _random_zero_points(sym, n, seed):
    from restrictlab.symbols import _zero_on_ray

    rng = np.random.default_rng(seed)
    box_p, box_f = sym.region.position, sym.region.frequency
    pts = []
    while len(pts) < n:
        x = box_p.center + 0.55 * (rng.random(2) - 0.5) * (box_p.hi - box_p.lo)
        ang = rng.random() * 2 * math.pi
        d = np.array([math.cos(ang), math.sin(ang)])
        half = 0.5 * (box_f.hi - box_f.lo)
        r_max = 1.0 / np.max(np.abs(d) / half)
        xi = _zero_on_ray(sym, x, box_f.center, d, r_max)
        if xi is not None:
            pts.append(PhaseSpacePoint(x, xi))
    return pts


def test_torus_flow_is_straight():
    st = PhaseSpacePoint([0.1, 0.2], [0.6, 0.8])
    traj = integrate_flow(TORUS, st, 1.0, 1e-10)
    for s in (-0.8, -0.2, 0.37, 0.99):
        assert_allclose(traj.interp(s)[:2], st.x + 2 * s * st.xi, atol=1e-12)
        assert_allclose(traj.interp(s)[2:], st.xi, atol=1e-12)


def test_hermite_flow_analytic_orbit():
    r = 0.5
    q0 = math.sqrt(1 - r * r)
    st = PhaseSpacePoint([r, 0.0], [0.0, q0])
    traj = integrate_flow(HERMITE, st, math.pi, 1e-10)
    for s in (0.3, 0.7, -1.1):
        assert_allclose(
            traj.interp(s)[:2],
            [r * math.cos(2 * s), q0 * math.sin(2 * s)],
            atol=1e-9,
        )
    # period pi return
    back = traj.interp(math.pi)
    assert np.max(np.abs(back - np.array(st.as_tuple()))) <= 10 * 1e-10


def test_energy_conservation_and_reversal():
    for sym in (TORUS, SPHERE, HERMITE):
        for pt in _random_zero_points(sym, 5, seed=hash(sym.id) % 2**31):
            traj = integrate_flow(sym, pt, 1.0, 1e-10)
            assert traj.energy_drift <= 1e-8
            end = traj.state_at(0.6)
            back = integrate_flow(sym, end, 0.6, 1e-10).interp(-0.6)
            assert np.max(np.abs(back - np.array(pt.as_tuple()))) <= 1e-7


def test_tolerance_range_enforced():
    st = PhaseSpacePoint([0.1, 0.2], [0.6, 0.8])
    with pytest.raises(ValueError):
        integrate_flow(TORUS, st, 1.0, 1e-3)


def test_jet_first_order_is_hamilton_field():
    for sym in (TORUS, SPHERE, HERMITE):
        pt = _random_zero_points(sym, 1, seed=5)[0]
        jet = flow_jet(sym, pt, 4, "recursion")
        assert_allclose(jet.z_coeffs[0], pt.x, atol=1e-14)
        assert_allclose(jet.z_coeffs[1], sym.grad_xi(pt), atol=1e-12)
        assert_allclose(jet.zeta_coeffs[1], -sym.grad_x(pt), atol=1e-12)


def test_torus_jets_vanish_above_one():
    st = PhaseSpacePoint([0.0, 0.1], [0.8, 0.6])
    jet = flow_jet(TORUS, st, 6, "recursion")
    assert_allclose(jet.z_coeffs[2:], 0.0, atol=1e-14)


def test_hermite_second_jet():
    r = 0.4
    st = PhaseSpacePoint([r, 0.0], [0.0, math.sqrt(1 - r * r)])
    jet = flow_jet(HERMITE, st, 3, "recursion")
    assert_allclose(jet.z_coeffs[2], [-4 * r, 0.0], atol=1e-12)


def test_recursion_vs_finite_difference():
    for sym in (TORUS, SPHERE, HERMITE):
        for pt in _random_zero_points(sym, 3, seed=77):
            rec = flow_jet(sym, pt, 5, "recursion")
            fd = flow_jet(sym, pt, 5, "finite-difference")
            for j in range(6):
                scale = max(1.0, np.linalg.norm(rec.z_coeffs[j]))
                assert np.linalg.norm(rec.z_coeffs[j] - fd.z_coeffs[j]) <= 1e-4 * scale
            flow_jet_cross(sym, pt, 5)  # must not raise


def test_cotangent_lift_properties():
    pt = PhaseSpacePoint([0.3, 0.4], [0.7, -0.2])
    assert_allclose(cotangent_lift(Diffeo.identity(), pt).as_tuple(), pt.as_tuple())
    a = np.array([[1.0, 2.0], [0.5, 3.0]])
    lifted = cotangent_lift(Diffeo.linear(a), pt)
    v = np.array([0.11, -0.37])
    assert_allclose(lifted.xi @ (a @ v), pt.xi @ v, atol=1e-14)
    rot = cotangent_lift(Diffeo.rotation(0.6), pt)
    assert_allclose(np.linalg.norm(rot.xi), np.linalg.norm(pt.xi), atol=1e-14)


def test_cotangent_lift_singular_jacobian():
    with pytest.raises(DomainError):
        cotangent_lift(Diffeo.linear(np.zeros((2, 2))), PhaseSpacePoint([0, 0], [1, 0]))


@pytest.mark.slow
def test_symplectic_jacobian():
    omega = np.block([[np.zeros((2, 2)), np.eye(2)], [-np.eye(2), np.zeros((2, 2))]])
    for sym in (SPHERE, HERMITE):
        pt = _random_zero_points(sym, 1, seed=13)[0]
        jac = flow_jacobian_fd(sym, pt, 0.5)
        assert np.max(np.abs(jac.T @ omega @ jac - omega)) <= 1e-5
