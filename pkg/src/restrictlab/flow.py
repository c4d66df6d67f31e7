"""Bicharacteristic flow integration and Taylor jets of the flow.

The flow solves xdot = d_xi p, xidot = -d_x p.  Jets at s = 0 come from two
independent routes: Taylor-mode recursion through the ODE right-hand side
(exact up to roundoff for built-in symbols) and polynomial fits to dense
output of the adaptive integrator (Richardson-extrapolated).  Acceptance
checks play the two against each other.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.integrate import solve_ivp

from .errors import DomainError, IntegrationError, JetInconsistencyError
from .jets import taylor_ode_jet
from .symbols import PhaseSpacePoint, SymbolModel


def hamilton_rhs(sym: SymbolModel) -> Callable:
    """Right-hand side of the Hamiltonian system on generic scalars."""

    def rhs(state):
        x1, x2, xi1, xi2 = state
        gx = sym.grad_x_any(x1, x2, xi1, xi2)
        gxi = sym.grad_xi_any(x1, x2, xi1, xi2)
        return [gxi[0], gxi[1], -gx[0], -gx[1]]

    return rhs


@dataclass
class FlowTrajectory:
    origin: PhaseSpacePoint
    s_grid: np.ndarray
    states: np.ndarray  # (n, 4) rows (x1, x2, xi1, xi2)
    interp: Callable  # s -> (4,) state array
    energy_drift: float
    boundary_flag: bool = False

    def state_at(self, s) -> PhaseSpacePoint:
        v = self.interp(s)
        return PhaseSpacePoint(v[:2], v[2:])

    def to_csv(self, path, sym: Optional[SymbolModel] = None):
        with open(path, "w") as fh:
            fh.write("s,x1,x2,xi1,xi2,p_value\n")
            for s, row in zip(self.s_grid, self.states):
                p = (
                    sym.eval_xy(row[:2], row[2:])
                    if sym is not None
                    else float("nan")
                )
                fh.write(f"{s:.17g},{row[0]:.17g},{row[1]:.17g},{row[2]:.17g},{row[3]:.17g},{p:.17g}\n")


@dataclass
class FlowJet:
    order: int
    z_coeffs: np.ndarray  # (order + 1, 2), entry j = d^j/ds^j z at s=0
    zeta_coeffs: np.ndarray
    method: str


def integrate_flow(sym: SymbolModel, start: PhaseSpacePoint, s_max: float, tol: float = 1e-10) -> FlowTrajectory:
    """Adaptive high-order Runge-Utta solution on [-s_max, s_max] with dense output."""
    if not (1e-14 <= tol <= 1e-6):
        raise ValueError("tol must lie in [1e-14, 1e-6]")
    rhs = hamilton_rhs(sym)

    def f(_s, y):
        return rhs(list(y))

    y0 = np.array(start.as_tuple())
    sols = {}
    for sign in (+1, -1):
        if s_max == 0:
            continue
        sol = solve_ivp(
            f,
            (0.0, sign * s_max),
            y0,
            method="DOP853",
            rtol=tol,
            atol=tol,
            dense_output=True,
        )
        if not sol.success:
            raise IntegrationError(f"flow integration failed: {sol.message}")
        sols[sign] = sol

    def interp(s):
        s = float(s)
        if s >= 0:
            if s == 0.0 or +1 not in sols:
                return y0.copy()
            return sols[+1].sol(min(s, s_max))
        return sols[-1].sol(max(s, -s_max))

    grids = []
    if -1 in sols:
        grids.append(np.concatenate([sols[-1].t[::-1]]))
    if +1 in sols:
        grids.append(sols[+1].t)
    s_grid = np.unique(np.concatenate(grids)) if grids else np.array([0.0])
    dense_s = np.union1d(s_grid, np.linspace(-s_max, s_max, 201)) if s_max > 0 else s_grid
    states = np.array([interp(s) for s in dense_s])
    p0 = sym.eval_xy(y0[:2], y0[2:])
    drift = max(abs(sym.eval_xy(row[:2], row[2:]) - p0) for row in states)

    lo2 = sym.region.position.center - 2.0 * (sym.region.position.center - sym.region.position.lo)
    hi2 = sym.region.position.center + 2.0 * (sym.region.position.hi - sym.region.position.center)
    boundary = bool(np.any(states[:, :2] < lo2) or np.any(states[:, :2] > hi2))

    return FlowTrajectory(
        origin=start,
        s_grid=dense_s,
        states=states,
        interp=interp,
        energy_drift=float(drift),
        boundary_flag=boundary,
    )


def flow_jet(sym: SymbolModel, start: PhaseSpacePoint, k: int, method: str = "recursion") -> FlowJet:
    """Jet (d^j/ds^j of the flow at s=0, j = 0..k) by the requested method."""
    if method == "recursion":
        if k > sym.max_order - 2:
            raise ValueError(f"recursion jets need k <= max_order - 2 = {sym.max_order - 2}")
        series = taylor_ode_jet(hamilton_rhs(sym), list(start.as_tuple()), k)
        derivs = np.array([s.derivatives(k) for s in series])  # (4, k+1)
        return FlowJet(order=k, z_coeffs=derivs[:2].T.copy(), zeta_coeffs=derivs[2:].T.copy(), method="recursion")
    if method == "finite-difference":
        if k > 8:
            raise ValueError("finite-difference jets support k <= 8")
        return _fd_jet(sym, start, k)
    raise ValueError(f"unknown jet method {method!r}")


def _fd_jet(sym: SymbolModel, start: PhaseSpacePoint, k: int) -> FlowJet:
    """Least-squares polynomial fit of dense flow output, Richardson-extrapolated."""
    deg = k + 2
    h_fd = max(1e-2, (1e-10) ** (1.0 / (k + 3)))
    tol = 1e-12

    def fit(width):
        traj = integrate_flow(sym, start, width, tol=tol)
        nodes = width * np.cos(np.linspace(0.0, math.pi, 4 * (deg + 1)))
        vals = np.array([traj.interp(s) for s in nodes])  # (n, 4)
        # Vandermonde in s/width for conditioning
        v = np.vander(nodes / width, deg + 1, increasing=True)
        coef, *_ = np.linalg.lstsq(v, vals, rcond=None)
        scale = width ** -np.arange(deg + 1)
        derivs = coef * scale[:, None] * np.array([math.factorial(j) for j in range(deg + 1)])[:, None]
        return derivs[: k + 1]  # (k+1, 4)

    d_h = fit(h_fd)
    d_h2 = fit(h_fd / 2.0)
    out = np.empty_like(d_h)
    for j in range(k + 1):
        m = deg + 1 - j  # leading truncation order of the degree-`deg` fit
        w = 2.0**m
        out[j] = (w * d_h2[j] - d_h[j]) / (w - 1.0)
    return FlowJet(order=k, z_coeffs=out[:, :2].copy(), zeta_coeffs=out[:, 2:].copy(), method="finite-difference")


def flow_jet_cross(sym: SymbolModel, start: PhaseSpacePoint, k: int, rtol: float = 1e-4) -> FlowJet:
    """Recursion jet, validated against the finite-difference jet.

    Raises :class:`JetInconsistencyError` when the two methods disagree by
    more than ``rtol`` relative to the jet magnitude at each order.
    """
    rec = flow_jet(sym, start, k, "recursion")
    fd = flow_jet(sym, start, k, "finite-difference")
    for j in range(k + 1):
        for a, b in ((rec.z_coeffs[j], fd.z_coeffs[j]), (rec.zeta_coeffs[j], fd.zeta_coeffs[j])):
            scale = max(1.0, float(np.linalg.norm(a)))
            if np.linalg.norm(a - b) > rtol * scale:
                raise JetInconsistencyError(
                    f"jet methods disagree at order {j}", recursion=a, finite_difference=b
                )
    return rec


@dataclass(frozen=True)
class Diffeo:
    """A diffeomorphism of position space with a Jacobian oracle."""

    map_fn: Callable
    jac_fn: Callable

    @classmethod
    def linear(cls, a, b=None):
        a = np.asarray(a, dtype=float)
        shift = np.zeros(2) if b is None else np.asarray(b, dtype=float)
        return cls(map_fn=lambda x: a @ x + shift, jac_fn=lambda x: a)

    @classmethod
    def identity(cls):
        return cls.linear(np.eye(2))

    @classmethod
    def rotation(cls, angle):
        c, s = math.cos(angle), math.sin(angle)
        return cls.linear(np.array([[c, -s], [s, c]]))


def cotangent_lift(diffeo: Diffeo, pt: PhaseSpacePoint) -> PhaseSpacePoint:
    """Push a covector through a diffeomorphism: (tau(x), (tau'(x)^T)^-1 xi)."""
    jac = np.asarray(diffeo.jac_fn(pt.x), dtype=float)
    det = np.linalg.det(jac)
    if abs(det) < 1e-8:
        raise DomainError("diffeomorphism Jacobian is numerically singular")
    new_x = np.asarray(diffeo.map_fn(pt.x), dtype=float)
    new_xi = np.linalg.solve(jac.T, pt.xi)
    return PhaseSpacePoint(new_x, new_xi)


def flow_jacobian_fd(sym: SymbolModel, start: PhaseSpacePoint, s: float, h: float = 1e-5) -> np.ndarray:
    """Central-difference Jacobian of the time-s flow map (for symplectic checks)."""
    y0 = np.array(start.as_tuple())
    jac = np.empty((4, 4))
    for i in range(4):
        e = np.zeros(4)
        e[i] = h
        plus = integrate_flow(sym, PhaseSpacePoint((y0 + e)[:2], (y0 + e)[2:]), abs(s), tol=1e-12).interp(s)
        minus = integrate_flow(sym, PhaseSpacePoint((y0 - e)[:2], (y0 - e)[2:]), abs(s), tol=1e-12).interp(s)
        jac[:, i] = (plus - minus) / (2.0 * h)
    return jac
