"""Contact order between a plane curve and the bicharacteristic flow.

Pipeline: locate tangential frequencies xi(t) (Newton on the tangency map),
continue them along the curve, reparametrize the curve by flow time, and
classify the contact order at each parameter by comparing curve jets with
flow jets.  Points of contact order >= 2 form a discrete set away from the
flow-line case, which is detected and flagged separately.

High-order derivatives of the implicitly defined branch xi(t) and of the
flow-time map come from truncated Taylor arithmetic, not from splines, so
jet gaps are resolved down to roundoff.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import make_interp_spline
from scipy.optimize import brentq, minimize_scalar

from .curves import CurveModel
from .errors import (
    AdmissibilityWarning,
    BranchError,
    DomainError,
    LeadingVectorError,
    SeedError,
    UncertainClassification,
)
from .flow import flow_jet, integrate_flow
from .jets import Taylor1d, gsqrt, implicit_jet, taylor_ode_jet
from .polynomials import p_sigma_float
from .symbols import PhaseSpacePoint, SymbolModel

NEWTON_TOL = 1e-12
JET_NOISE_FLOOR = 1e-12


def _rot90(v):
    return np.array([-v[1], v[0]])


@dataclass
class ContactSettings:
    n_t: int = 33
    j_max: int = 8
    rtol: float = 1e-5
    n_seed_directions: int = 64
    scan_grid: int = 257


# -- tangential frequencies --------------------------------------------------


def _theta_value(sym: SymbolModel, x, gdot, xi):
    pt = PhaseSpacePoint(x, xi)
    g = sym.grad_xi(pt)
    return np.array([g @ _rot90(gdot), sym.eval(pt, check_region=False)])


def _theta_jacobian(sym: SymbolModel, x, gdot, xi):
    pt = PhaseSpacePoint(x, xi)
    h = sym.hess_xi(pt)
    return np.vstack([h @ _rot90(gdot), sym.grad_xi(pt)])


def tangential_frequency(sym: SymbolModel, curve: CurveModel, t: float, seed) -> np.ndarray:
    """Newton solve for xi with p(gamma(t), xi) = 0 and d_xi p parallel to gamma'."""
    x = curve.gamma(t)
    gdot = curve.velocity(t)
    xi = np.asarray(seed, dtype=float).copy()
    for _ in range(50):
        val = _theta_value(sym, x, gdot, xi)
        if np.max(np.abs(val)) <= NEWTON_TOL:
            jac = _theta_jacobian(sym, x, gdot, xi)
            cond = np.linalg.cond(jac)
            if cond > 1e8:
                warnings.warn(
                    f"tangency Jacobian condition number {cond:.2e}",
                    AdmissibilityWarning,
                    stacklevel=2,
                )
            return xi
        jac = _theta_jacobian(sym, x, gdot, xi)
        try:
            step = np.linalg.solve(jac, val)
        except np.linalg.LinAlgError as exc:
            raise SeedError(f"singular tangency Jacobian at t={t}") from exc
        xi = xi - step
    raise SeedError(f"tangential frequency did not converge at t={t} from seed {seed}")


def seed_tangential_frequencies(sym: SymbolModel, curve: CurveModel, t: float, n_dir=64) -> List[np.ndarray]:
    """Angular sweep of the fiber zero set, keeping sign changes of the tangency residual."""
    x = curve.gamma(t)
    gdot = curve.velocity(t)
    box = sym.region.frequency
    center = box.center
    half = 0.5 * (box.hi - box.lo)
    roots, residuals = [], []
    for j in range(n_dir):
        ang = 2.0 * math.pi * j / n_dir
        d = np.array([math.cos(ang), math.sin(ang)])
        r_max = 1.0 / np.max(np.abs(d) / np.maximum(half, 1e-300))
        xi = _zero_on_ray_cached(sym, x, center, d, r_max)
        roots.append(xi)
        if xi is None:
            residuals.append(None)
        else:
            residuals.append(float(sym.grad_xi(PhaseSpacePoint(x, xi)) @ _rot90(gdot)))
    seeds = []
    for j in range(n_dir):
        j2 = (j + 1) % n_dir
        r1, r2 = residuals[j], residuals[j2]
        if r1 is None or r2 is None or r1 * r2 > 0:
            continue
        guess = 0.5 * (roots[j] + roots[j2])
        try:
            xi = tangential_frequency(sym, curve, t, guess)
        except SeedError:
            continue
        if all(np.linalg.norm(xi - s) > 1e-8 for s in seeds):
            seeds.append(xi)
    return seeds


def _zero_on_ray_cached(sym, x, center, d, r_max):
    from .symbols import _zero_on_ray

    return _zero_on_ray(sym, x, center, d, r_max)


# -- branch continuation ------------------------------------------------------


@dataclass
class TangentBranch:
    """A smooth tangential-frequency branch xi(t) along the curve."""

    sym: SymbolModel
    curve: CurveModel
    t_grid: np.ndarray
    xi: np.ndarray  # (n, 2)
    orientation: int
    residuals: np.ndarray
    _splines: tuple = field(default=None, repr=False)

    def _spline(self):
        if self._splines is None:
            k = min(5, len(self.t_grid) - 1)
            self._splines = (
                make_interp_spline(self.t_grid, self.xi[:, 0], k=k),
                make_interp_spline(self.t_grid, self.xi[:, 1], k=k),
            )
        return self._splines

    def xi_predict(self, t):
        t = np.clip(t, self.t_grid[0], self.t_grid[-1])
        s1, s2 = self._spline()
        return np.array([float(s1(t)), float(s2(t))])

    def xi_at(self, t) -> np.ndarray:
        """Newton-corrected branch value at an arbitrary parameter."""
        return tangential_frequency(self.sym, self.curve, t, self.xi_predict(t))

    def xi_jet(self, t, order):
        """Taylor series of xi around t, from the implicit tangency system."""
        xi0 = self.xi_at(t)
        gx, gy = self.curve.gamma_taylor(t, order + 1)
        gdx, gdy = gx.diff(), gy.diff()
        gxt, gyt = gx.truncate(order), gy.truncate(order)

        def residual(_ts, ys):
            xi1, xi2 = ys
            g = self.sym.grad_xi_any(gxt, gyt, xi1, xi2)
            tangency = g[0] * (-1.0) * gdy + g[1] * gdx
            pval = self.sym.eval_generic(gxt, gyt, xi1, xi2)
            if not isinstance(pval, Taylor1d):
                pval = Taylor1d.constant(pval, order)
            return [tangency, pval]

        jac = _theta_jacobian(self.sym, self.curve.gamma(t), self.curve.velocity(t), xi0)
        return implicit_jet(residual, Taylor1d.variable(t, order), xi0, jac, order)

    def point(self, t) -> PhaseSpacePoint:
        return PhaseSpacePoint(self.curve.gamma(t), self.xi_at(t))


def continue_branch(sym: SymbolModel, curve: CurveModel, t_grid, seed, t_seed=None) -> TangentBranch:
    """Predictor-corrector continuation of a tangential-frequency branch."""
    t_grid = np.asarray(t_grid, dtype=float)
    n = len(t_grid)
    if t_seed is None:
        i0 = n // 2
    else:
        i0 = int(np.argmin(np.abs(t_grid - t_seed)))
    xi = np.full((n, 2), np.nan)
    xi[i0] = tangential_frequency(sym, curve, t_grid[i0], seed)

    def step(i_from, i_to):
        t_to = t_grid[i_to]
        dt = t_to - t_grid[i_from]
        pred = xi[i_from].copy()
        i_prev = 2 * i_from - i_to
        have_prev = 0 <= i_prev < n and np.all(np.isfinite(xi[i_prev]))
        if have_prev:
            slope = (xi[i_from] - xi[i_prev]) / (t_grid[i_from] - t_grid[i_prev])
            pred = xi[i_from] + slope * dt
        try:
            sol = tangential_frequency(sym, curve, t_to, pred)
        except SeedError:
            # halve the step once: correct at the midpoint, then retry
            t_half = 0.5 * (t_grid[i_from] + t_to)
            mid = tangential_frequency(sym, curve, t_half, xi[i_from])
            sol = tangential_frequency(sym, curve, t_to, mid)
        scale = 10.0 * max(
            abs(dt),
            float(np.linalg.norm(xi[i_from] - xi[i_prev])) if have_prev else abs(dt),
        )
        if np.linalg.norm(sol - pred) > scale:
            raise BranchError(f"branch jump detected near t={t_to}", t_split=t_to)
        xi[i_to] = sol

    for i in range(i0 + 1, n):
        step(i - 1, i)
    for i in range(i0 - 1, -1, -1):
        step(i + 1, i)

    residuals = np.array(
        [
            np.max(np.abs(_theta_value(sym, curve.gamma(t), curve.velocity(t), xi[i])))
            for i, t in enumerate(t_grid)
        ]
    )
    v0 = curve.velocity(t_grid[i0])
    orient = int(np.sign(sym.grad_xi(PhaseSpacePoint(curve.gamma(t_grid[i0]), xi[i0])) @ v0))
    return TangentBranch(sym=sym, curve=curve, t_grid=t_grid, xi=xi, orientation=orient, residuals=residuals)


# -- flow-time reparametrization ----------------------------------------------


class FlowReparamCurve(CurveModel):
    """The curve re-run at flow speed: d/dtau gamma(L(tau)) = d_xi p.

    Carries the base curve, the branch xi, and the dense solution of the
    scalar ODE for L.  Jets of L (and hence of the reparametrized curve and
    of xi composed with L) are produced by Taylor recursion of the ODE using
    implicit jets of the branch, so every derivative is roundoff-accurate.
    """

    def __init__(self, sym: SymbolModel, base: CurveModel, branch: TangentBranch, anchor: float):
        self.sym = sym
        self.base = base
        self.branch = branch
        self.anchor = float(anchor)
        self.orientation = branch.orientation
        a, b = base.interval
        speeds = [self._speed_ratio(t) for t in np.linspace(a, b, 33)]
        fmin = min(abs(s) for s in speeds)
        if fmin < 1e-6:
            raise DomainError("flow speed |d_xi p| degenerate along the curve (A1 violation)")
        t_max = (b - a) / fmin + 1.0

        sols = {}
        for sign, target in ((+1, b if self.orientation > 0 else a), (-1, a if self.orientation > 0 else b)):
            ev = lambda _s, y, target=target: y[0] - target
            ev.terminal = True
            sol = solve_ivp(
                lambda _s, y: [self._speed_ratio(float(y[0]))],
                (0.0, sign * t_max),
                [self.anchor],
                method="DOP853",
                rtol=1e-12,
                atol=1e-12,
                dense_output=True,
                events=[ev],
            )
            if not sol.success:
                raise DomainError(f"flow-time reparametrization failed: {sol.message}")
            sols[sign] = sol
        self._sols = sols
        tau_plus = sols[+1].t[-1]
        tau_minus = sols[-1].t[-1]
        self.interval = (tau_minus, tau_plus)
        self._jet_cache = {}
        self.min_speed = fmin

    def _speed_ratio(self, t):
        t = float(np.clip(t, *self.base.interval))
        xi = self.branch.xi_at(t)
        g = self.sym.grad_xi(PhaseSpacePoint(self.base.gamma(t), xi))
        return self.orientation * float(np.hypot(g[0], g[1])) / self.base.chart_speed(t)

    # -- the map L ------------------------------------------------------------

    def L_of(self, tau: float) -> float:
        tau = float(tau)
        lo, hi = self.interval
        if tau < lo - 1e-9 or tau > hi + 1e-9:
            raise DomainError(f"flow time {tau} outside the reparametrized range {self.interval}")
        if tau >= 0:
            sol = self._sols[+1]
            return float(sol.sol(min(tau, sol.t[-1]))[0]) if sol.t[-1] > 0 else self.anchor
        sol = self._sols[-1]
        return float(sol.sol(max(tau, sol.t[-1]))[0])

    def tau_of(self, t: float) -> float:
        t = float(t)
        lo, hi = self.interval
        f = lambda tau: self.L_of(tau) - t
        fa, fb = f(lo), f(hi)
        span = abs(self.base.interval[1] - self.base.interval[0])
        if abs(fa) <= 1e-9 * max(1.0, span):
            return lo
        if abs(fb) <= 1e-9 * max(1.0, span):
            return hi
        if fa * fb > 0:
            raise DomainError(f"parameter {t} outside the reparametrized range")
        return float(brentq(f, lo, hi, xtol=1e-13))

    def _jets(self, tau, order):
        key = (round(float(tau), 12), order)
        hit = self._jet_cache.get(key)
        if hit is not None:
            return hit
        ell0 = self.L_of(tau)
        base_x, base_y = self.base.gamma_taylor(ell0, order + 1)
        dx, dy = base_x.diff(), base_y.diff()
        xi_jets = self.branch.xi_jet(ell0, order)

        def rhs(state):
            ell = state[0]
            w = ell - ell.coeffs[0]
            gx = base_x.truncate(order).compose(w)
            gy = base_y.truncate(order).compose(w)
            x1 = xi_jets[0].compose(w)
            x2 = xi_jets[1].compose(w)
            g = self.sym.grad_xi_any(gx, gy, x1, x2)
            num = gsqrt(g[0] * g[0] + g[1] * g[1])
            den = gsqrt(dx.compose(w) ** 2 + dy.compose(w) ** 2)
            return [self.orientation * num / den]

        l_series = taylor_ode_jet(rhs, [ell0], order)[0]
        inner = l_series - ell0
        gx = base_x.truncate(order).compose(inner)
        gy = base_y.truncate(order).compose(inner)
        x1 = xi_jets[0].compose(inner)
        x2 = xi_jets[1].compose(inner)
        out = (l_series, (gx, gy), (x1, x2))
        if len(self._jet_cache) > 256:
            self._jet_cache.clear()
        self._jet_cache[key] = out
        return out

    def gamma_taylor(self, tau, order):
        return self._jets(tau, order)[1]

    def xi_taylor(self, tau, order):
        return self._jets(tau, order)[2]

    def xi_at(self, tau) -> np.ndarray:
        return self.branch.xi_at(self.L_of(tau))

    def point(self, tau) -> PhaseSpacePoint:
        return PhaseSpacePoint(self.gamma(tau), self.xi_at(tau))


def flow_time_reparam(sym: SymbolModel, curve: CurveModel, branch: TangentBranch, anchor: Optional[float] = None) -> FlowReparamCurve:
    """Reparametrize the curve by bicharacteristic flow time, anchored at L(0)=anchor."""
    if anchor is None:
        a, b = curve.interval
        anchor = 0.0 if a <= 0.0 <= b else 0.5 * (a + b)
    return FlowReparamCurve(sym, curve, branch, anchor)


# -- contact order --------------------------------------------------------------


@dataclass
class ContactClassification:
    sigma: int
    at_least: bool  # True when no jet gap was found up to j_max
    confidence: float
    jet_gaps: np.ndarray  # normalized gap sizes ||D_j||/scale_j for j = 2..j_max

    def label(self):
        return f">={self.sigma}" if self.at_least else str(self.sigma)


def contact_order_at(sym: SymbolModel, curve_reparam: FlowReparamCurve, tau: float,
                     j_max: int = 8, rtol: float = 1e-5) -> ContactClassification:
    """Classify the contact order at one flow-time parameter by jet comparison."""
    pt = curve_reparam.point(tau)
    jets = flow_jet(sym, pt, j_max, "recursion")
    gx, gy = curve_reparam.gamma_taylor(tau, j_max)
    ratios = []
    for j in range(2, j_max + 1):
        curve_j = np.array([gx.derivative_value(j), gy.derivative_value(j)])
        gap = np.linalg.norm(jets.z_coeffs[j] - curve_j)
        scale = max(1.0, float(np.linalg.norm(curve_j)))
        ratios.append(gap / scale)
    ratios = np.array(ratios)
    above = np.where(ratios > rtol)[0]
    if above.size == 0:
        below_max = max(float(np.max(ratios)), JET_NOISE_FLOOR) if ratios.size else JET_NOISE_FLOOR
        conf = math.log10(rtol / below_max)
        return ContactClassification(sigma=j_max, at_least=True, confidence=conf, jet_gaps=ratios)
    first = above[0]
    sigma = first + 1  # gap at derivative order j = first + 2 means contact order j - 1
    below_max = float(np.max(ratios[:first])) if first > 0 else JET_NOISE_FLOOR
    conf = math.log10(ratios[first] / max(below_max, JET_NOISE_FLOOR))
    if conf < 2.0:
        warnings.warn(
            f"contact classification at tau={tau} has confidence {conf:.2f} < 2",
            UncertainClassification,
            stacklevel=2,
        )
    return ContactClassification(sigma=sigma, at_least=False, confidence=conf, jet_gaps=ratios)


# -- G2 detection ---------------------------------------------------------------


def g2_test(sym: SymbolModel, curve_reparam: FlowReparamCurve, branch: TangentBranch,
            tau: float, rtol: float = 1e-5) -> bool:
    """True iff the lifted curve satisfies the second Hamilton equation at tau."""
    x1, x2 = curve_reparam.xi_taylor(tau, 1)
    xidot = np.array([x1.derivative_value(1), x2.derivative_value(1)])
    pt = curve_reparam.point(tau)
    h = xidot + sym.grad_x(pt)
    return bool(np.linalg.norm(h) <= rtol)


@dataclass
class G2ScanResult:
    points: np.ndarray
    non_isolated: bool


def g2_scan(sym: SymbolModel, curve: CurveModel, n_grid: int = 257,
            branch: Optional[TangentBranch] = None, zero_tol: float = 1e-8) -> G2ScanResult:
    """Scan the defect H(t) = nu(t) xi'(t) + d_x p along the curve for zeros.

    ``nu`` converts the branch derivative to flow time, so zeros of H are
    exactly the parameters of contact order >= 2.  Contiguous runs of
    sub-threshold nodes flag a non-isolated zero set (flow-line case).
    """
    a, b = curve.interval
    if branch is None:
        t_mid = 0.5 * (a + b)
        seeds = seed_tangential_frequencies(sym, curve, t_mid)
        if not seeds:
            raise SeedError("no tangential frequency found for the scan")
        branch = continue_branch(sym, curve, np.linspace(a, b, 65), seeds[0], t_mid)

    def h_norm(t):
        xi_jet = branch.xi_jet(t, 1)
        xidot = np.array([xi_jet[0].derivative_value(1), xi_jet[1].derivative_value(1)])
        pt = PhaseSpacePoint(curve.gamma(t), np.array([xi_jet[0].coeffs[0], xi_jet[1].coeffs[0]]))
        g = sym.grad_xi(pt)
        nu = branch.orientation * float(np.hypot(g[0], g[1])) / curve.chart_speed(t)
        return float(np.linalg.norm(nu * xidot + sym.grad_x(pt)))

    ts = np.linspace(a, b, n_grid)
    vals = np.array([h_norm(t) for t in ts])
    below = vals <= zero_tol
    # non-isolated: a sub-threshold run wide relative to the whole grid
    # (a flat but isolated zero of high order only covers a few cells)
    run_limit = max(4, n_grid // 16)
    run = 0
    for flag in below:
        run = run + 1 if flag else 0
        if run >= run_limit:
            warnings.warn("G2 zeros not isolated at grid resolution (possible flow line)",
                          UserWarning, stacklevel=2)
            return G2ScanResult(points=np.array([]), non_isolated=True)
    points = []
    for i in range(1, n_grid - 1):
        if vals[i] <= vals[i - 1] and vals[i] <= vals[i + 1]:
            res = minimize_scalar(h_norm, bracket=None, bounds=(ts[i - 1], ts[i + 1]),
                                  method="bounded", options={"xatol": 1e-12})
            if res.fun <= zero_tol:
                points.append(float(res.x))
    for edge in (0, n_grid - 1):
        if vals[edge] <= zero_tol:
            points.append(float(ts[edge]))
    points = sorted(points)
    dedup = []
    spacing = (b - a) / (n_grid - 1)
    for t in points:
        if not dedup or t - dedup[-1] > spacing:
            dedup.append(t)
    return G2ScanResult(points=np.array(dedup), non_isolated=False)


# -- leading vector -------------------------------------------------------------


@dataclass
class LeadingVector:
    b: np.ndarray
    v: np.ndarray
    pairing: float
    b_fit: np.ndarray
    rel_mismatch: float


def leading_vector_b(sym: SymbolModel, curve_reparam: FlowReparamCurve, branch: TangentBranch,
                     tau0: float, sigma: int, u_span: float = 0.04, n_fit: int = 7,
                     fit_rtol: float = 0.02) -> LeadingVector:
    """Leading coefficient of the flow-curve gap expansion, cross-validated.

    The analytic route differentiates the branch and the pulled-back spatial
    gradient; the oracle route least-squares fits samples of
    z_{v-u}(gamma(u), xi(u)) - gamma(v), produced by the numerical integrator,
    against the universal polynomial of the expansion.
    """
    pt0 = curve_reparam.point(tau0)
    xi1, xi2 = curve_reparam.xi_taylor(tau0, sigma)
    xi_sig = np.array([xi1.derivative_value(sigma), xi2.derivative_value(sigma)])
    gxs, gys = curve_reparam.gamma_taylor(tau0, sigma - 1) if sigma >= 1 else curve_reparam.gamma_taylor(tau0, 0)
    gx_series = sym.grad_x_any(gxs, gys, xi1.truncate(sigma - 1), xi2.truncate(sigma - 1))
    dgx = np.array([
        _as_taylor(gx_series[0], sigma - 1).derivative_value(sigma - 1),
        _as_taylor(gx_series[1], sigma - 1).derivative_value(sigma - 1),
    ])
    # sign convention: b is the leading Taylor coefficient of the flow-curve
    # gap itself (differentiating the Hamilton equations gives
    # d_s^{sigma+1} z - gamma^{(sigma+1)} = -d_xi^2 p (xi^{(sigma)} + d^{sigma-1} d_x p))
    b = -(sym.hess_xi(pt0) @ (xi_sig + dgx))

    g = sym.grad_xi(pt0)
    v = _rot90(g) / np.linalg.norm(g)
    pairing = float(b @ v)

    # oracle: fit the gap z_{v-u}(gamma(u), xi(u)) - gamma(v) against P_sigma,
    # with Richardson extrapolation in the sample span (the remainder of the
    # gap expansion contributes an O(span) relative bias to a single fit)
    lo, hi = curve_reparam.interval
    lo = max(lo, tau0 - u_span)
    hi = min(hi, tau0 + u_span)
    if hi - lo < 0.2 * u_span:
        raise LeadingVectorError("reparametrized range too short for the gap fit")

    def fit_once(scale):
        # samples contracted toward tau0 by `scale` so the two fits are
        # geometrically similar and the remainder bias scales linearly
        us = tau0 + scale * (np.linspace(lo, hi, n_fit) - tau0)
        min_dt = 0.4 * scale * (hi - lo) / n_fit
        num = np.zeros(2)
        den = 0.0
        for u in us:
            ptu = curve_reparam.point(u)
            for v_par in us:
                dt = v_par - u
                if abs(dt) < min_dt:
                    continue
                traj = integrate_flow(sym, ptu, abs(dt), tol=1e-12)
                z = traj.interp(dt)[:2]
                gap = z - curve_reparam.gamma(v_par)
                p_val = p_sigma_float(sigma, u - tau0, v_par - tau0)
                num += p_val * gap
                den += p_val * p_val
        return num / den

    b_full = fit_once(1.0)
    b_half = fit_once(0.5)
    b_fit = 2.0 * b_half - b_full
    rel = float(np.linalg.norm(b - b_fit) / max(np.linalg.norm(b), 1e-300))
    if rel > fit_rtol:
        raise LeadingVectorError(
            f"leading vector mismatch {rel:.3%} (analytic {b}, fit {b_fit})"
        )
    return LeadingVector(b=b, v=v, pairing=pairing, b_fit=b_fit, rel_mismatch=rel)


def _as_taylor(x, order):
    return x if isinstance(x, Taylor1d) else Taylor1d.constant(x, order)


# -- full pipeline ---------------------------------------------------------------


@dataclass
class ContactRecord:
    t: float
    sigma: int
    at_least: bool
    confidence: float
    jet_gaps: np.ndarray

    def sigma_label(self):
        return f">={self.sigma}" if self.at_least else str(self.sigma)


@dataclass
class ContactReport:
    per_t: List[ContactRecord]
    g2_points: np.ndarray
    g2_non_isolated: bool
    sigma_global: int
    infinite_flag: bool
    b_vec: Optional[np.ndarray]
    v_vec: Optional[np.ndarray]
    b_dot_v: Optional[float]
    t_star: Optional[float]
    branches: int

    def sigma_label(self):
        return f">={self.sigma_global}" if self.infinite_flag else str(self.sigma_global)

    def to_dict(self):
        return {
            "sigma_global": self.sigma_global,
            "infinite_flag": self.infinite_flag,
            "sigma_label": self.sigma_label(),
            "g2_points": [float(t) for t in self.g2_points],
            "g2_non_isolated": self.g2_non_isolated,
            "t_star": self.t_star,
            "b_vec": None if self.b_vec is None else [float(c) for c in self.b_vec],
            "v_vec": None if self.v_vec is None else [float(c) for c in self.v_vec],
            "b_dot_v": self.b_dot_v,
            "branches": self.branches,
            "per_t": [
                {
                    "t": r.t,
                    "sigma": r.sigma,
                    "at_least": r.at_least,
                    "confidence": r.confidence,
                    "jet_gaps": [float(g) for g in r.jet_gaps],
                }
                for r in self.per_t
            ],
        }


def global_sigma(sym: SymbolModel, curve: CurveModel, settings: Optional[ContactSettings] = None) -> ContactReport:
    """Full contact pipeline: seeds, branches, reparametrization, classification."""
    cfg = settings or ContactSettings()
    a, b = curve.interval
    margin = 0.05 * (b - a)
    t_mid = 0.0 if a + margin <= 0.0 <= b - margin else 0.5 * (a + b)
    seeds = seed_tangential_frequencies(sym, curve, t_mid, cfg.n_seed_directions)
    if not seeds:
        raise SeedError("no tangential frequency found; is sigma >= 1 on this curve?")

    t_grid = np.linspace(a, b, cfg.n_t)
    best_per_t = None
    branch_data = []
    for seed in seeds:
        branch = continue_branch(sym, curve, t_grid, seed, t_mid)
        reparam = flow_time_reparam(sym, curve, branch, anchor=t_mid)
        records = []
        for t in t_grid:
            tau = reparam.tau_of(t)
            cls = contact_order_at(sym, reparam, tau, cfg.j_max, cfg.rtol)
            records.append((t, cls))
        branch_data.append((branch, reparam, records))
        if best_per_t is None:
            best_per_t = records
        else:
            merged = []
            for (t, c_old), (_t2, c_new) in zip(best_per_t, records):
                better = c_new if (c_new.at_least, c_new.sigma) > (c_old.at_least, c_old.sigma) else c_old
                merged.append((t, better))
            best_per_t = merged

    per_t = [
        ContactRecord(t=float(t), sigma=c.sigma, at_least=c.at_least,
                      confidence=c.confidence, jet_gaps=c.jet_gaps)
        for t, c in best_per_t
    ]

    infinite = any(r.at_least for r in per_t)
    sigma_global = max(r.sigma for r in per_t)

    scan = g2_scan(sym, curve, cfg.scan_grid, branch_data[0][0])

    b_vec = v_vec = None
    pairing = None
    t_star = None
    if not infinite:
        # among maximal-order nodes prefer the one nearest the anchor
        # (interior when possible) so the cross-validation fit is two-sided
        def star_key(records):
            cands = [(t, c) for t, c in records if c.sigma == sigma_global]
            return min(cands, key=lambda tc: abs(tc[0] - t_mid)) if cands else None

        branch, reparam, records = branch_data[0]
        star = star_key(records)
        for cand_branch, cand_reparam, cand_records in branch_data:
            cand = star_key(cand_records)
            if cand is not None and (star is None or abs(cand[0] - t_mid) < abs(star[0] - t_mid)):
                branch, reparam, star = cand_branch, cand_reparam, cand
        t_star = star[0]
        tau_star = reparam.tau_of(t_star)
        lead = leading_vector_b(sym, reparam, branch, tau_star, sigma_global)
        b_vec, v_vec, pairing = lead.b, lead.v, lead.pairing
    else:
        stars = [r.t for r in per_t if r.at_least]
        t_star = stars[0] if stars else None

    return ContactReport(
        per_t=per_t,
        g2_points=scan.points,
        g2_non_isolated=scan.non_isolated,
        sigma_global=sigma_global,
        infinite_flag=infinite,
        b_vec=b_vec,
        v_vec=v_vec,
        b_dot_v=pairing,
        t_star=t_star,
        branches=len(branch_data),
    )
