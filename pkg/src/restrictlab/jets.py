"""Truncated Taylor-series ("jet") and dual-number arithmetic.

Two small scalar types drive all high-order differentiation in the package:

* ``Taylor1d`` -- a univariate Taylor polynomial truncated at a fixed order,
  used for jets of flows, implicitly defined frequency branches, and curve
  reparametrizations.  Coefficients are stored, not derivatives; the j-th
  derivative is ``j! * coeffs[j]``.
* ``Dual`` -- a first-order dual number whose components may themselves be
  duals or Taylor polynomials.  Nesting duals yields exact mixed partial
  derivatives of black-box scalar expressions.

Both types only need the generic helpers ``gsin``, ``gcos``, ``gsqrt`` to
interoperate with plain floats, so symbol and curve formulas are written
once and evaluated on any of the three scalar kinds.
"""

from __future__ import annotations

import math

import numpy as np


class Taylor1d:
    """Truncated Taylor series sum_j coeffs[j] * s**j with len = order + 1."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs):
        self.coeffs = np.asarray(coeffs, dtype=float)

    @classmethod
    def constant(cls, value, order):
        c = np.zeros(order + 1)
        c[0] = value
        return cls(c)

    @classmethod
    def variable(cls, value, order):
        """The series value + s (the expansion variable itself)."""
        c = np.zeros(order + 1)
        c[0] = value
        if order >= 1:
            c[1] = 1.0
        return cls(c)

    @property
    def order(self):
        return len(self.coeffs) - 1

    def derivative_value(self, j):
        """j-th derivative at the expansion point (coefficient times j!)."""
        if j > self.order:
            return 0.0
        return self.coeffs[j] * math.factorial(j)

    def derivatives(self, up_to=None):
        k = self.order if up_to is None else min(up_to, self.order)
        return np.array([self.derivative_value(j) for j in range(k + 1)])

    def truncate(self, order):
        c = np.zeros(order + 1)
        m = min(order, self.order)
        c[: m + 1] = self.coeffs[: m + 1]
        return Taylor1d(c)

    def shift_integrate(self, constant):
        """Antiderivative with given constant term; drops the top coefficient."""
        c = np.empty_like(self.coeffs)
        c[0] = constant
        c[1:] = self.coeffs[:-1] / np.arange(1, len(self.coeffs))
        return Taylor1d(c)

    def diff(self):
        if self.order == 0:
            return Taylor1d([0.0])
        return Taylor1d(self.coeffs[1:] * np.arange(1, len(self.coeffs)))

    def __add__(self, other):
        if isinstance(other, Taylor1d):
            return Taylor1d(self.coeffs + other.coeffs)
        if isinstance(other, Dual):
            return NotImplemented
        c = self.coeffs.copy()
        c[0] += other
        return Taylor1d(c)

    __radd__ = __add__

    def __neg__(self):
        return Taylor1d(-self.coeffs)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Taylor1d):
            n = len(self.coeffs)
            full = np.convolve(self.coeffs, other.coeffs)
            return Taylor1d(full[:n])
        if isinstance(other, Dual):
            return NotImplemented
        return Taylor1d(self.coeffs * other)

    __rmul__ = __mul__

    def reciprocal(self):
        a = self.coeffs
        if a[0] == 0.0:
            raise ZeroDivisionError("Taylor series with zero constant term")
        n = len(a)
        r = np.zeros(n)
        r[0] = 1.0 / a[0]
        for k in range(1, n):
            r[k] = -r[0] * np.dot(a[1 : k + 1], r[k - 1 :: -1][: k])
        return Taylor1d(r)

    def __truediv__(self, other):
        if isinstance(other, Taylor1d):
            return self * other.reciprocal()
        return Taylor1d(self.coeffs / other)

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, exponent):
        if not isinstance(exponent, int) or exponent < 0:
            raise ValueError("Taylor power supports nonnegative integers only")
        out = Taylor1d.constant(1.0, self.order)
        base = self
        e = exponent
        while e:
            if e & 1:
                out = out * base
            base = base * base
            e >>= 1
        return out

    def sqrt(self):
        a = self.coeffs
        if a[0] <= 0.0:
            raise ValueError("Taylor sqrt needs a positive constant term")
        n = len(a)
        r = np.zeros(n)
        r[0] = math.sqrt(a[0])
        for k in range(1, n):
            acc = a[k] - np.dot(r[1:k], r[k - 1 : 0 : -1]) if k > 1 else a[k]
            r[k] = acc / (2.0 * r[0])
        return Taylor1d(r)

    def sin_cos(self):
        u = self.coeffs
        n = len(u)
        s = np.zeros(n)
        c = np.zeros(n)
        s[0] = math.sin(u[0])
        c[0] = math.cos(u[0])
        j = np.arange(1, n)
        for k in range(1, n):
            ju = j[:k] * u[1 : k + 1]
            s[k] = np.dot(ju, c[k - 1 :: -1][: k]) / k
            c[k] = -np.dot(ju, s[k - 1 :: -1][: k]) / k
        return Taylor1d(s), Taylor1d(c)

    def exp(self):
        u = self.coeffs
        n = len(u)
        e = np.zeros(n)
        e[0] = math.exp(u[0])
        j = np.arange(1, n)
        for k in range(1, n):
            ju = j[:k] * u[1 : k + 1]
            e[k] = np.dot(ju, e[k - 1 :: -1][: k]) / k
        return Taylor1d(e)

    def compose(self, inner):
        """self(inner(s)) for an inner series with zero constant term."""
        if abs(inner.coeffs[0]) > 0.0:
            raise ValueError("composition requires inner constant term 0")
        out = Taylor1d.constant(self.coeffs[-1], inner.order)
        for a in self.coeffs[-2::-1]:
            out = out * inner + a
        return out

    def __call__(self, s):
        return float(np.polyval(self.coeffs[::-1], s))

    def __repr__(self):
        return f"Taylor1d({np.array2string(self.coeffs, precision=6)})"


class Dual:
    """First-order dual number a + b*eps; components may be nested scalars."""

    __slots__ = ("a", "b")

    def __init__(self, a, b=0.0):
        self.a = a
        self.b = b

    def __add__(self, other):
        if isinstance(other, Dual):
            return Dual(self.a + other.a, self.b + other.b)
        return Dual(self.a + other, self.b)

    __radd__ = __add__

    def __neg__(self):
        return Dual(-self.a, -self.b)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Dual):
            return Dual(self.a * other.a, self.a * other.b + self.b * other.a)
        return Dual(self.a * other, self.b * other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Dual):
            inv = _ginv(other.a)
            return Dual(self.a * inv, (self.b - self.a * inv * other.b) * inv)
        return Dual(self.a / other, self.b / other)

    def __rtruediv__(self, other):
        inv = _ginv(self.a)
        return Dual(other * inv, -other * inv * inv * self.b)

    def __pow__(self, exponent):
        if not isinstance(exponent, int) or exponent < 0:
            raise ValueError("Dual power supports nonnegative integers only")
        out = Dual(_one_like(self.a), _zero_like(self.a))
        base = self
        e = exponent
        while e:
            if e & 1:
                out = out * base
            base = base * base
            e >>= 1
        return out

    def __repr__(self):
        return f"Dual({self.a!r}, {self.b!r})"


def _zero_like(x):
    if isinstance(x, Dual):
        return Dual(_zero_like(x.a), _zero_like(x.b))
    if isinstance(x, Taylor1d):
        return Taylor1d.constant(0.0, x.order)
    return 0.0


def _one_like(x):
    if isinstance(x, Dual):
        return Dual(_one_like(x.a), _zero_like(x.b))
    if isinstance(x, Taylor1d):
        return Taylor1d.constant(1.0, x.order)
    return 1.0


def _ginv(x):
    if isinstance(x, Taylor1d):
        return x.reciprocal()
    if isinstance(x, Dual):
        ia = _ginv(x.a)
        return Dual(ia, -ia * ia * x.b)
    return 1.0 / x


def gsin(x):
    if isinstance(x, Dual):
        return Dual(gsin(x.a), gcos(x.a) * x.b)
    if isinstance(x, Taylor1d):
        return x.sin_cos()[0]
    return math.sin(x)


def gcos(x):
    if isinstance(x, Dual):
        return Dual(gcos(x.a), -gsin(x.a) * x.b)
    if isinstance(x, Taylor1d):
        return x.sin_cos()[1]
    return math.cos(x)


def gsqrt(x):
    if isinstance(x, Dual):
        r = gsqrt(x.a)
        return Dual(r, x.b * _ginv(2.0 * r))
    if isinstance(x, Taylor1d):
        return x.sqrt()
    return math.sqrt(x)


def gexp(x):
    if isinstance(x, Dual):
        e = gexp(x.a)
        return Dual(e, e * x.b)
    if isinstance(x, Taylor1d):
        return x.exp()
    return math.exp(x)


def taylor_ode_jet(rhs, state0, order):
    """Taylor coefficients of an autonomous ODE solution by Picard recursion.

    ``rhs`` maps a list of scalar-like states to a list of the same length and
    must accept ``Taylor1d`` entries.  Returns a list of ``Taylor1d``, one per
    state component, truncated at ``order``.
    """
    n = len(state0)
    series = [Taylor1d.constant(float(v), order) for v in state0]
    for k in range(order):
        f = rhs(series)
        for i in range(n):
            fi = f[i] if isinstance(f[i], Taylor1d) else Taylor1d.constant(f[i], order)
            series[i].coeffs[k + 1] = fi.coeffs[k] / (k + 1)
    return series


def implicit_jet(residual, t_series, y0, jac, order):
    """Taylor coefficients of y(t) defined by residual(t, y) = 0.

    ``residual`` maps (Taylor1d, list of Taylor1d) to a list of Taylor1d;
    ``jac`` is the (invertible) Jacobian d(residual)/dy at the expansion
    point, as an (n, n) array.  Solves order by order: the order-(k+1)
    coefficient of the residual is linear in the unknown y-coefficient with
    matrix ``jac``.
    """
    n = len(y0)
    jac = np.asarray(jac, dtype=float)
    lu = np.linalg.inv(jac)
    series = [Taylor1d.constant(float(v), order) for v in y0]
    for k in range(order):
        r = residual(t_series, series)
        rk = np.array([ri.coeffs[k + 1] for ri in r])
        corr = -lu @ rk
        for i in range(n):
            series[i].coeffs[k + 1] = corr[i]
    return series
