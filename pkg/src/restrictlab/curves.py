"""Parametric plane curves with high-order derivative oracles.

Every curve exposes its local Taylor expansion (``gamma_taylor``), from which
point values and derivatives of any order follow.  Analytic curve families
(polynomial/expression, circle, latitude) have machine-exact jets; tabulated
point sets are fit by high-degree arclength splines with documented loss of
jet accuracy above order ~4.

``speed`` is the factor converting parameter measure to the arclength measure
used for restriction norms; it is the Euclidean chart speed except for
sphere-chart curves, where the round metric enters.
"""

from __future__ import annotations

import math
from typing import Callable, Sequence

import numpy as np
from scipy.interpolate import make_interp_spline

from .jets import Taylor1d
from .symbols import parse_expression


class CurveModel:
    """Base class: subclasses implement gamma_taylor and interval."""

    interval = (0.0, 1.0)
    min_speed = 0.0

    def gamma_taylor(self, t: float, order: int):
        raise NotImplementedError

    def gamma(self, t: float) -> np.ndarray:
        gx, gy = self.gamma_taylor(t, 0)
        return np.array([gx.coeffs[0], gy.coeffs[0]])

    def gamma_deriv(self, t: float, j: int) -> np.ndarray:
        gx, gy = self.gamma_taylor(t, j)
        return np.array([gx.derivative_value(j), gy.derivative_value(j)])

    def velocity(self, t: float) -> np.ndarray:
        return self.gamma_deriv(t, 1)

    def chart_speed(self, t: float) -> float:
        v = self.velocity(t)
        return float(np.hypot(v[0], v[1]))

    def speed(self, t: float) -> float:
        """Arclength density; overridden where a metric differs from the chart."""
        return self.chart_speed(t)

    def _estimate_min_speed(self, n=257):
        a, b = self.interval
        ts = np.linspace(a, b, n)
        self.min_speed = float(min(self.chart_speed(t) for t in ts))
        if self.min_speed <= 0.0:
            raise ValueError("curve parametrization is not regular (zero speed)")


class ExprCurve(CurveModel):
    """Curve whose components are arithmetic expressions in the parameter t."""

    def __init__(self, expr_x: str, expr_y: str, interval=(-0.3, 0.3)):
        self.fx = parse_expression(expr_x, ("t",))
        self.fy = parse_expression(expr_y, ("t",))
        self.spec = (expr_x, expr_y)
        self.interval = (float(interval[0]), float(interval[1]))
        self._estimate_min_speed()

    def gamma_taylor(self, t, order):
        tt = Taylor1d.variable(t, order)
        gx, gy = self.fx(tt), self.fy(tt)
        if not isinstance(gx, Taylor1d):
            gx = Taylor1d.constant(gx, order)
        if not isinstance(gy, Taylor1d):
            gy = Taylor1d.constant(gy, order)
        return gx, gy


class PolyCurve(CurveModel):
    """gamma(t) = (sum_i cx[i] t^i, sum_i cy[i] t^i)."""

    def __init__(self, coeffs_x: Sequence[float], coeffs_y: Sequence[float], interval=(-0.3, 0.3)):
        self.cx = np.asarray(coeffs_x, dtype=float)
        self.cy = np.asarray(coeffs_y, dtype=float)
        self.interval = (float(interval[0]), float(interval[1]))
        self._estimate_min_speed()

    def gamma_taylor(self, t, order):
        tt = Taylor1d.variable(t, order)
        out = []
        for c in (self.cx, self.cy):
            acc = Taylor1d.constant(c[-1], order)
            for a in c[-2::-1]:
                acc = acc * tt + a
            out.append(acc)
        return out[0], out[1]


class CircleCurve(CurveModel):
    """gamma(t) = center + radius (cos t, sin t)."""

    def __init__(self, center=(0.0, 0.0), radius=1.0, interval=(0.0, 2.0 * math.pi)):
        self.center = np.asarray(center, dtype=float)
        self.radius = float(radius)
        self.interval = (float(interval[0]), float(interval[1]))
        self.min_speed = self.radius

    def gamma_taylor(self, t, order):
        tt = Taylor1d.variable(t, order)
        s, c = tt.sin_cos()
        return self.center[0] + self.radius * c, self.center[1] + self.radius * s

    def speed(self, t):
        return self.radius

    def chart_speed(self, t):
        return self.radius


class LatitudeCurve(CurveModel):
    """The circle theta = theta0 on the sphere chart (theta, phi)."""

    def __init__(self, theta0: float, interval=(0.0, 2.0 * math.pi)):
        self.theta0 = float(theta0)
        self.interval = (float(interval[0]), float(interval[1]))
        self.min_speed = 1.0

    def gamma_taylor(self, t, order):
        return Taylor1d.constant(self.theta0, order), Taylor1d.variable(t, order)

    def speed(self, t):
        # round-metric arclength density: ds = sin(theta0) dphi
        return math.sin(self.theta0)

    def chart_speed(self, t):
        return 1.0


class TableCurve(CurveModel):
    """Curve fit through a table of points by a high-degree arclength spline.

    Jet accuracy degrades above order ~4; prefer analytic families when
    derivatives beyond that matter.
    """

    def __init__(self, points, degree=11):
        pts = np.asarray(points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) < 4:
            raise ValueError("table curve needs an (n, 2) array with n >= 4")
        chord = np.concatenate([[0.0], np.cumsum(np.hypot(*np.diff(pts, axis=0).T))])
        k = min(degree, len(pts) - 1)
        if k % 2 == 0:
            k -= 1
        self._sx = make_interp_spline(chord, pts[:, 0], k=k)
        self._sy = make_interp_spline(chord, pts[:, 1], k=k)
        self._k = k
        self.interval = (0.0, float(chord[-1]))
        self._estimate_min_speed()

    def gamma_taylor(self, t, order):
        out = []
        for sp in (self._sx, self._sy):
            derivs = [float(sp(t))]
            d = sp
            for j in range(1, order + 1):
                if j <= self._k:
                    d = d.derivative()
                    derivs.append(float(d(t)))
                else:
                    derivs.append(0.0)
            coeffs = [derivs[j] / math.factorial(j) for j in range(order + 1)]
            out.append(Taylor1d(coeffs))
        return out[0], out[1]


class ReparamCurve(CurveModel):
    """gamma(phi(t)) for a smooth monotone map phi given as a jet-evaluable callable."""

    def __init__(self, base: CurveModel, phi: Callable, interval):
        self.base = base
        self.phi = phi
        self.interval = (float(interval[0]), float(interval[1]))
        self._estimate_min_speed()

    def gamma_taylor(self, t, order):
        u_series = self.phi(Taylor1d.variable(t, order))
        if not isinstance(u_series, Taylor1d):
            u_series = Taylor1d.constant(u_series, order)
        u0 = float(u_series.coeffs[0])
        inner = u_series - u0
        bx, by = self.base.gamma_taylor(u0, order)
        return bx.compose(inner), by.compose(inner)

    def speed(self, t):
        u_series = self.phi(Taylor1d.variable(t, 1))
        return self.base.speed(float(u_series.coeffs[0])) * abs(float(u_series.coeffs[1]))


class AffineImageCurve(CurveModel):
    """The image A gamma(t) + shift of a base curve under an affine map."""

    def __init__(self, base: CurveModel, a, shift=(0.0, 0.0)):
        self.base = base
        self.a = np.asarray(a, dtype=float)
        self.shift = np.asarray(shift, dtype=float)
        self.interval = base.interval
        self._estimate_min_speed()

    def gamma_taylor(self, t, order):
        bx, by = self.base.gamma_taylor(t, order)
        gx = self.a[0, 0] * bx + self.a[0, 1] * by + self.shift[0]
        gy = self.a[1, 0] * bx + self.a[1, 1] * by + self.shift[1]
        return gx, gy


def curve_from_spec(spec: dict) -> CurveModel:
    """Build a curve from its JSON configuration form."""
    kind = spec.get("kind")
    if kind == "poly":
        cx, cy = spec["coeffs"]
        return PolyCurve(cx, cy, spec.get("interval", (-0.3, 0.3)))
    if kind == "expr":
        ex, ey = spec["components"]
        return ExprCurve(ex, ey, spec.get("interval", (-0.3, 0.3)))
    if kind == "circle":
        return CircleCurve(spec.get("center", (0.0, 0.0)), spec["radius"],
                           spec.get("interval", (0.0, 2.0 * math.pi)))
    if kind == "latitude":
        return LatitudeCurve(spec["theta0"], spec.get("interval", (0.0, 2.0 * math.pi)))
    if kind == "table":
        return TableCurve(spec["points"], spec.get("degree", 11))
    raise ValueError(f"unknown curve kind {kind!r}")


def parse_curve_string(text: str) -> dict:
    """Parse compact CLI curve specs into the JSON configuration form.

    Forms: ``poly:t,t^3`` | ``circle:cx,cy,r`` | ``latitude:theta0``.
    An optional ``@a,b`` suffix overrides the parameter interval.
    """
    body = text
    interval = None
    if "@" in text:
        body, tail = text.split("@", 1)
        lo, hi = tail.split(",")
        interval = (float(lo), float(hi))
    if ":" not in body:
        raise ValueError(f"malformed curve spec {text!r}")
    kind, args = body.split(":", 1)
    if kind == "poly":
        parts = args.split(",")
        if len(parts) != 2:
            raise ValueError("poly curve needs two comma-separated components")
        spec = {"kind": "expr", "components": [parts[0], parts[1]]}
    elif kind == "circle":
        vals = [float(v) for v in args.split(",")]
        if len(vals) != 3:
            raise ValueError("circle curve needs cx,cy,r")
        spec = {"kind": "circle", "center": vals[:2], "radius": vals[2]}
    elif kind == "latitude":
        spec = {"kind": "latitude", "theta0": float(args)}
    else:
        raise ValueError(f"unknown curve kind {kind!r}")
    if interval is not None:
        spec["interval"] = interval
    return spec
