import math
import warnings

import numpy as np
import pytest
from numpy.testing import assert_allclose

from restrictlab.contact import (
    ContactSettings,
    contact_order_at,
    continue_branch,
    flow_time_reparam,
    g2_scan,
    g2_test,
    global_sigma,
    leading_vector_b,
    seed_tangential_frequencies,
    tangential_frequency,
)
from restrictlab.curves import (
    AffineImageCurve,
    CircleCurve,
    LatitudeCurve,
    PolyCurve,
    ReparamCurve,
)
from restrictlab.errors import SeedError
from restrictlab.symbols import PhaseSpacePoint, get_symbol, transport_symbol

TORUS = get_symbol("torus_laplace")
SPHERE = get_symbol("sphere_laplace")
HERMITE = get_symbol("hermite")


def model_curve(sigma, half=0.3):
    return PolyCurve([0, 1], [0] * (sigma + 1) + [1], (-half, half))


def test_tangential_frequency_parabola():
    c = model_curve(1)
    xi = tangential_frequency(TORUS, c, 0.0, [0.9, 0.1])
    assert_allclose(xi, [1.0, 0.0], atol=1e-12)
    xi2 = tangential_frequency(TORUS, c, 0.2, [0.9, 0.3])
    v = c.velocity(0.2)
    assert_allclose(xi2, v / np.linalg.norm(v), atol=1e-12)


def test_tangential_frequency_hermite_circle():
    r = 0.5
    circ = CircleCurve((0, 0), r)
    t = 0.7
    xi = tangential_frequency(HERMITE, circ, t, 0.8 * circ.velocity(t) / r)
    tangent = circ.velocity(t) / r
    assert_allclose(xi, math.sqrt(1 - r * r) * tangent, atol=1e-12)


def test_tangential_frequency_sphere_equator():
    eq = LatitudeCurve(math.pi / 2)
    xi = tangential_frequency(SPHERE, eq, 0.3, [0.1, 0.9])
    assert_allclose(xi, [0.0, 1.0], atol=1e-12)


def test_bad_seed_raises():
    with pytest.raises(SeedError):
        tangential_frequency(TORUS, model_curve(1), 0.0, [1e-9, 1e-9])


def test_seed_sweep_finds_both_orientations():
    seeds = seed_tangential_frequencies(TORUS, model_curve(1), 0.0)
    assert len(seeds) == 2
    assert any(np.allclose(s, [1, 0], atol=1e-10) for s in seeds)
    assert any(np.allclose(s, [-1, 0], atol=1e-10) for s in seeds)


def test_branch_unit_circle():
    c = model_curve(1)
    grid = np.linspace(-0.3, 0.3, 25)
    br = continue_branch(TORUS, c, grid, np.array([1.0, 0.0]), 0.0)
    assert br.residuals.max() <= 1e-10
    for i, t in enumerate(grid):
        v = c.velocity(t)
        assert_allclose(br.xi[i], v / np.linalg.norm(v), atol=1e-10)


def test_branch_hermite_circle_modulus():
    circ = CircleCurve((0, 0), 0.5)
    grid = np.linspace(0, 2 * math.pi, 33)
    seeds = seed_tangential_frequencies(HERMITE, circ, math.pi)
    br = continue_branch(HERMITE, circ, grid, seeds[0], math.pi)
    mods = np.hypot(br.xi[:, 0], br.xi[:, 1])
    assert_allclose(mods, math.sqrt(3) / 2, atol=1e-10)


def test_flow_reparam_line_speed_two():
    line = PolyCurve([0, 1], [0], (-0.3, 0.3))
    grid = np.linspace(-0.3, 0.3, 17)
    br = continue_branch(TORUS, line, grid, np.array([1.0, 0.0]), 0.0)
    rp = flow_time_reparam(TORUS, line, br)
    for tau in (-0.1, 0.05, 0.14):
        assert_allclose(rp.L_of(tau), 2 * tau, atol=1e-10)
    # defining property: d(gamma o L)/dtau = d_xi p
    gx, gy = rp.gamma_taylor(0.07, 1)
    vel = np.array([gx.derivative_value(1), gy.derivative_value(1)])
    pt = rp.point(0.07)
    assert_allclose(vel, TORUS.grad_xi(pt), atol=1e-8)


def _reparam_for(sym, curve, anchor=None):
    a, b = curve.interval
    mid = anchor if anchor is not None else (0.0 if a < 0 < b else 0.5 * (a + b))
    seeds = seed_tangential_frequencies(sym, curve, mid)
    br = continue_branch(sym, curve, np.linspace(a, b, 33), seeds[0], mid)
    return flow_time_reparam(sym, curve, br, anchor=mid), br


@pytest.mark.parametrize("sigma", [1, 2, 3, 4, 5])
def test_contact_order_model_curves(sigma):
    c = model_curve(sigma)
    rp, _ = _reparam_for(TORUS, c)
    cls0 = contact_order_at(TORUS, rp, rp.tau_of(0.0))
    assert not cls0.at_least and cls0.sigma == sigma
    assert cls0.confidence >= 2.0
    clsx = contact_order_at(TORUS, rp, rp.tau_of(0.17))
    assert clsx.sigma == 1 and not clsx.at_least


def test_contact_order_flow_line_flag():
    circ = CircleCurve((0, 0), 2 ** -0.5)
    rp, _ = _reparam_for(HERMITE, circ)
    cls = contact_order_at(HERMITE, rp, rp.tau_of(1.0))
    assert cls.at_least and cls.sigma == 8


def test_g2_equivalence_with_order_two():
    # g2_test(t) <=> contact_order_at(t) >= 2 on a batch of random cases
    rng = np.random.default_rng(42)
    checked = 0
    for _ in range(200):
        sigma = int(rng.integers(1, 4))
        c = model_curve(sigma)
        rp, br = _reparam_for(TORUS, c)
        t = float(rng.uniform(-0.25, 0.25))
        if rng.random() < 0.3:
            t = 0.0
        tau = rp.tau_of(t)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            is_g2 = g2_test(TORUS, rp, br, tau)
            order = contact_order_at(TORUS, rp, tau)
        assert is_g2 == (order.sigma >= 2 or order.at_least)
        checked += 1
    assert checked == 200


@pytest.mark.parametrize("sigma", [2, 3, 5])
def test_g2_scan_isolated_zero(sigma):
    scan = g2_scan(TORUS, model_curve(sigma))
    assert not scan.non_isolated
    assert len(scan.points) == 1
    assert abs(scan.points[0]) <= 1e-6


def test_g2_scan_empty_and_flow_line():
    assert len(g2_scan(TORUS, model_curve(1)).points) == 0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        scan = g2_scan(TORUS, PolyCurve([0, 1], [0], (-0.3, 0.3)))
    assert scan.non_isolated


@pytest.mark.parametrize("sigma", [1, 2, 3])
def test_leading_vector_cross_validation(sigma):
    c = model_curve(sigma)
    rp, br = _reparam_for(TORUS, c)
    lead = leading_vector_b(TORUS, rp, br, rp.tau_of(0.0), sigma)
    assert lead.rel_mismatch <= 0.02
    assert abs(lead.pairing) >= 1e-3
    # v is a unit vector orthogonal to the flow direction
    g = TORUS.grad_xi(rp.point(rp.tau_of(0.0)))
    assert_allclose(lead.v @ g, 0.0, atol=1e-12)
    assert_allclose(np.linalg.norm(lead.v), 1.0, atol=1e-14)


def test_pairing_sign_flips_with_v():
    c = model_curve(2)
    rp, br = _reparam_for(TORUS, c)
    lead = leading_vector_b(TORUS, rp, br, rp.tau_of(0.0), 2)
    assert_allclose(abs((-lead.v) @ lead.b), abs(lead.pairing), rtol=1e-12)


def test_global_sigma_quartic():
    rep = global_sigma(TORUS, model_curve(3))
    assert rep.sigma_global == 3 and not rep.infinite_flag
    assert len(rep.g2_points) == 1 and abs(rep.g2_points[0]) <= 1e-6
    assert abs(rep.b_dot_v) > 1e-3
    sigma_away = [r.sigma for r in rep.per_t if abs(r.t) > 0.05]
    assert all(s == 1 for s in sigma_away)


def test_global_sigma_sphere_latitudes():
    rep = global_sigma(SPHERE, LatitudeCurve(math.pi / 3))
    assert rep.sigma_global == 1 and not rep.infinite_flag
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        rep_eq = global_sigma(SPHERE, LatitudeCurve(math.pi / 2))
    assert rep_eq.infinite_flag


def test_global_sigma_hermite_circles():
    rep = global_sigma(HERMITE, CircleCurve((0, 0), 0.5))
    assert rep.sigma_global == 1 and not rep.infinite_flag
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        rep2 = global_sigma(HERMITE, CircleCurve((0, 0), 2 ** -0.5))
    assert rep2.infinite_flag and rep2.g2_non_isolated


def test_reparametrization_invariance():
    base = model_curve(2)
    rep1 = global_sigma(TORUS, base)
    # t -> t^3 + t maps [-0.278, 0.278] into [-0.3, 0.3]
    rc = ReparamCurve(base, lambda t: t**3 + t, (-0.278, 0.278))
    rep2 = global_sigma(TORUS, rc)
    assert rep1.sigma_global == rep2.sigma_global
    assert rep1.infinite_flag == rep2.infinite_flag
    assert len(rep1.g2_points) == len(rep2.g2_points) == 1
    assert abs(rep2.g2_points[0]) <= 1e-6  # phi(0) = 0 fixes the G2 point


def test_chart_invariance_affine():
    a = np.array([[1.1, 0.3], [-0.2, 0.9]])
    shift = np.array([0.05, -0.02])
    base = model_curve(2)
    rep1 = global_sigma(TORUS, base)
    rep2 = global_sigma(transport_symbol(TORUS, a, shift), AffineImageCurve(base, a, shift))
    assert rep1.sigma_global == rep2.sigma_global
    assert rep1.infinite_flag == rep2.infinite_flag
    assert_allclose(sorted(rep1.g2_points), sorted(rep2.g2_points), atol=1e-6)


def test_plateau_contract():
    # ||D_j|| small up to sigma, jump of >= 1e2 * rtol right after
    for sigma in (2, 3):
        c = model_curve(sigma)
        rp, _ = _reparam_for(TORUS, c)
        cls = contact_order_at(TORUS, rp, rp.tau_of(0.0), j_max=8, rtol=1e-5)
        gaps = cls.jet_gaps  # normalized, j = 2..8
        assert all(g <= 1e-5 for g in gaps[: sigma - 1])
        assert gaps[sigma - 1] >= 1e2 * 1e-5
