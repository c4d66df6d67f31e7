"""Hamiltonian symbols p(x, xi) on R^2 x R^2 with derivative oracles.

Built-in symbols carry closed-form partial derivatives up to order 12; user
symbols supplied as arithmetic expressions are differentiated with nested
dual numbers.  All symbol formulas are written against the generic scalar
helpers from :mod:`restrictlab.jets`, so the same code path evaluates on
floats, dual numbers and truncated Taylor series.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from .errors import DomainError, ExtrapolationWarning, OrderError
from .jets import Dual, Taylor1d, _one_like, _zero_like, gcos, gsin

VARIABLE_NAMES = ("x1", "x2", "xi1", "xi2")

TOL_A1 = 1e-6
TOL_A2 = 1e-6
ZERO_SET_TOL = 1e-12


@dataclass(frozen=True)
class PhaseSpacePoint:
    """A point (x, xi) of phase space R^2 x R^2."""

    x: np.ndarray
    xi: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "x", np.asarray(self.x, dtype=float))
        object.__setattr__(self, "xi", np.asarray(self.xi, dtype=float))
        if self.x.shape != (2,) or self.xi.shape != (2,):
            raise DomainError("phase-space point needs 2-vectors x and xi")
        if not (np.all(np.isfinite(self.x)) and np.all(np.isfinite(self.xi))):
            raise DomainError("phase-space point has non-finite components")

    def as_tuple(self):
        return (self.x[0], self.x[1], self.xi[0], self.xi[1])


@dataclass(frozen=True)
class Box:
    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "lo", np.asarray(self.lo, dtype=float))
        object.__setattr__(self, "hi", np.asarray(self.hi, dtype=float))

    def contains(self, v, pad=0.0):
        v = np.asarray(v)
        return bool(np.all(v >= self.lo - pad) and np.all(v <= self.hi + pad))

    @property
    def center(self):
        return 0.5 * (self.lo + self.hi)

    def grid(self, n_per_axis):
        xs = np.linspace(self.lo[0], self.hi[0], n_per_axis)
        ys = np.linspace(self.lo[1], self.hi[1], n_per_axis)
        return [np.array([a, b]) for a in xs for b in ys]


@dataclass(frozen=True)
class Region:
    """Product region K = K_P x K_F of position and frequency boxes."""

    position: Box
    frequency: Box

    def contains(self, pt: PhaseSpacePoint, pad=0.0):
        return self.position.contains(pt.x, pad) and self.frequency.contains(pt.xi, pad)


@dataclass(frozen=True)
class SymbolModel:
    """A Hamiltonian symbol with generic evaluation and derivative oracles.

    ``eval_generic`` takes the four scalar coordinates (x1, x2, xi1, xi2) and
    must accept floats, :class:`Dual` and :class:`Taylor1d` inputs.  Built-in
    symbols additionally provide ``deriv_exact`` (closed-form partials) and
    generic gradient callables; user symbols fall back to nested duals.
    """

    id: str
    eval_generic: Callable
    region: Region
    max_order: int = 12
    deriv_exact: Optional[Callable] = None
    grad_x_generic: Optional[Callable] = field(default=None, repr=False)
    grad_xi_generic: Optional[Callable] = field(default=None, repr=False)

    def with_region(self, region: Region) -> "SymbolModel":
        return replace(self, region=region)

    # -- evaluation ---------------------------------------------------------

    def eval(self, pt: PhaseSpacePoint, check_region=True) -> float:
        if check_region and not self.region.contains(pt, pad=1e-9):
            warnings.warn(
                f"symbol {self.id!r} evaluated outside its region",
                ExtrapolationWarning,
                stacklevel=2,
            )
        val = self.eval_generic(*pt.as_tuple())
        if not math.isfinite(val):
            raise DomainError(f"symbol {self.id!r} returned non-finite value")
        return float(val)

    def eval_xy(self, x, xi) -> float:
        return self.eval(PhaseSpacePoint(x, xi), check_region=False)

    # -- derivatives --------------------------------------------------------

    def deriv(self, pt: PhaseSpacePoint, alpha) -> float:
        """Partial derivative for a 4-multi-index or a sequence of variable ids."""
        counts, order = _normalize_alpha(alpha)
        if order > self.max_order:
            raise OrderError(f"derivative order {order} exceeds max_order {self.max_order}")
        if order == 0:
            return self.eval(pt, check_region=False)
        if self.deriv_exact is not None:
            return float(self.deriv_exact(*pt.as_tuple(), counts))
        return _nested_dual_derivative(self.eval_generic, pt.as_tuple(), counts)

    def grad_x(self, pt: PhaseSpacePoint) -> np.ndarray:
        if self.grad_x_generic is not None:
            return np.asarray(self.grad_x_generic(*pt.as_tuple()), dtype=float)
        return np.array([self.deriv(pt, (1, 0, 0, 0)), self.deriv(pt, (0, 1, 0, 0))])

    def grad_xi(self, pt: PhaseSpacePoint) -> np.ndarray:
        if self.grad_xi_generic is not None:
            return np.asarray(self.grad_xi_generic(*pt.as_tuple()), dtype=float)
        return np.array([self.deriv(pt, (0, 0, 1, 0)), self.deriv(pt, (0, 0, 0, 1))])

    def hess_xi(self, pt: PhaseSpacePoint) -> np.ndarray:
        a = self.deriv(pt, (0, 0, 2, 0))
        b = self.deriv(pt, (0, 0, 1, 1))
        c = self.deriv(pt, (0, 0, 0, 2))
        return np.array([[a, b], [b, c]])

    def grad_x_any(self, x1, x2, xi1, xi2):
        """Gradient in x for generic scalar inputs (jets, duals)."""
        if self.grad_x_generic is not None:
            return list(self.grad_x_generic(x1, x2, xi1, xi2))
        return _dual_gradient(self.eval_generic, (x1, x2, xi1, xi2), (0, 1))

    def grad_xi_any(self, x1, x2, xi1, xi2):
        if self.grad_xi_generic is not None:
            return list(self.grad_xi_generic(x1, x2, xi1, xi2))
        return _dual_gradient(self.eval_generic, (x1, x2, xi1, xi2), (2, 3))


def _normalize_alpha(alpha):
    """Accept (a1, a2, b1, b2) per-variable orders, or a variable-index tuple.

    A length-4 sequence is always read as per-variable derivative orders over
    (x1, x2, xi1, xi2); any other length is read as a sequence of variable
    indices in 0..3 (whose ordering is immaterial).
    """
    seq = list(alpha)
    if len(seq) == 4:
        counts = tuple(int(v) for v in seq)
        if any(c < 0 for c in counts):
            raise ValueError("multi-index entries must be nonnegative")
        return counts, sum(counts)
    counts = [0, 0, 0, 0]
    for v in seq:
        iv = int(v)
        if iv < 0 or iv > 3:
            raise ValueError(f"variable index {v} outside 0..3")
        counts[iv] += 1
    return tuple(counts), len(seq)


def _counts_to_seq(counts):
    seq = []
    for var, c in enumerate(counts):
        seq.extend([var] * c)
    return seq


def _nested_dual_derivative(fn, vals, counts):
    seq = _counts_to_seq(counts)
    args = [float(v) for v in vals]
    for var in seq:
        args = [
            Dual(a, _one_like(a) if i == var else _zero_like(a))
            for i, a in enumerate(args)
        ]
    out = fn(*args)
    for _ in seq:
        out = out.b
    return float(out)


def _dual_gradient(fn, vals, var_ids):
    out = []
    for var in var_ids:
        args = [
            Dual(a, _one_like(a) if i == var else _zero_like(a))
            for i, a in enumerate(vals)
        ]
        out.append(fn(*args).b)
    return out


# -- built-in symbols -------------------------------------------------------


def _torus_eval(x1, x2, xi1, xi2):
    return xi1 * xi1 + xi2 * xi2 - 1.0


def _torus_deriv(x1, x2, xi1, xi2, counts):
    a1, a2, b1, b2 = counts
    if a1 or a2:
        return 0.0
    return _quadratic_1d(xi1, b1) * _kron(b2) + _kron(b1) * _quadratic_1d(xi2, b2) - _kron(b1) * _kron(b2)


def _kron(order):
    return 1.0 if order == 0 else 0.0


def _quadratic_1d(v, order):
    """d^order/dv^order of v^2."""
    if order == 0:
        return v * v
    if order == 1:
        return 2.0 * v
    if order == 2:
        return 2.0
    return 0.0


def _hermite_eval(x1, x2, xi1, xi2):
    return x1 * x1 + x2 * x2 + xi1 * xi1 + xi2 * xi2 - 1.0


def _hermite_deriv(x1, x2, xi1, xi2, counts):
    vals = (x1, x2, xi1, xi2)
    total = sum(counts)
    if total == 0:
        return _hermite_eval(*vals)
    nz = [i for i, c in enumerate(counts) if c]
    if len(nz) > 1:
        return 0.0
    return _quadratic_1d(vals[nz[0]], counts[nz[0]])


def _csc2_taylor(theta, order):
    t = Taylor1d.variable(theta, order)
    s, _ = t.sin_cos()
    return (s * s).reciprocal()


def _sphere_eval(x1, x2, xi1, xi2):
    s = gsin(x1)
    return xi1 * xi1 + (xi2 * xi2) / (s * s) - 1.0


def _sphere_deriv(x1, x2, xi1, xi2, counts):
    a1, a2, b1, b2 = counts
    if a2:
        return 0.0
    # p = (xi1^2 - 1) + xi2^2 * csc^2(x1): tensor structure in (x1, xi1, xi2).
    term1 = (_quadratic_1d(xi1, b1) - _kron(b1)) if (a1 == 0 and b2 == 0) else 0.0
    csc2_d = _csc2_taylor(x1, a1).derivative_value(a1)
    term2 = _quadratic_1d(xi2, b2) * csc2_d if b1 == 0 else 0.0
    return term1 + term2


def _torus_grad_x(x1, x2, xi1, xi2):
    z = _zero_like(x1)
    return (z, z)


def _torus_grad_xi(x1, x2, xi1, xi2):
    return (2.0 * xi1, 2.0 * xi2)


def _hermite_grad_x(x1, x2, xi1, xi2):
    return (2.0 * x1, 2.0 * x2)


def _hermite_grad_xi(x1, x2, xi1, xi2):
    return (2.0 * xi1, 2.0 * xi2)


def _sphere_grad_x(x1, x2, xi1, xi2):
    s = gsin(x1)
    c = gcos(x1)
    inv_s2 = _ginv_square(s)
    return (-2.0 * (xi2 * xi2) * c * inv_s2 * _ginv_any(s), _zero_like(x1))


def _sphere_grad_xi(x1, x2, xi1, xi2):
    s = gsin(x1)
    return (2.0 * xi1, 2.0 * xi2 * _ginv_square(s))


def _ginv_any(v):
    if isinstance(v, Taylor1d):
        return v.reciprocal()
    if isinstance(v, Dual):
        from .jets import _ginv

        return _ginv(v)
    return 1.0 / v


def _ginv_square(v):
    inv = _ginv_any(v)
    return inv * inv


_TWO_PI = 2.0 * math.pi

_BUILTIN_REGIONS = {
    "torus_laplace": Region(
        Box([-math.pi, -math.pi], [math.pi, math.pi]), Box([-2.0, -2.0], [2.0, 2.0])
    ),
    "sphere_laplace": Region(
        Box([0.35, 0.0], [math.pi - 0.35, _TWO_PI]), Box([-2.0, -2.0], [2.0, 2.0])
    ),
    "hermite": Region(Box([-0.75, -0.75], [0.75, 0.75]), Box([-2.0, -2.0], [2.0, 2.0])),
}


def make_torus_symbol() -> SymbolModel:
    return SymbolModel(
        id="torus_laplace",
        eval_generic=_torus_eval,
        region=_BUILTIN_REGIONS["torus_laplace"],
        deriv_exact=_torus_deriv,
        grad_x_generic=_torus_grad_x,
        grad_xi_generic=_torus_grad_xi,
    )


def make_sphere_symbol() -> SymbolModel:
    return SymbolModel(
        id="sphere_laplace",
        eval_generic=_sphere_eval,
        region=_BUILTIN_REGIONS["sphere_laplace"],
        deriv_exact=_sphere_deriv,
        grad_x_generic=_sphere_grad_x,
        grad_xi_generic=_sphere_grad_xi,
    )


def make_hermite_symbol() -> SymbolModel:
    return SymbolModel(
        id="hermite",
        eval_generic=_hermite_eval,
        region=_BUILTIN_REGIONS["hermite"],
        deriv_exact=_hermite_deriv,
        grad_x_generic=_hermite_grad_x,
        grad_xi_generic=_hermite_grad_xi,
    )


# -- expression parser for custom symbols -----------------------------------


class _Tokenizer:
    def __init__(self, text, variables):
        self.text = text
        self.pos = 0
        self.variables = variables

    def peek(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1
        if self.pos >= len(self.text):
            return None
        return self.text[self.pos]

    def next_token(self):
        ch = self.peek()
        if ch is None:
            return None
        if ch in "+-*/^()":
            self.pos += 1
            return ch
        if ch.isdigit() or ch == ".":
            start = self.pos
            while self.pos < len(self.text) and (
                self.text[self.pos].isdigit() or self.text[self.pos] in ".eE"
                or (self.text[self.pos] in "+-" and self.text[self.pos - 1] in "eE")
            ):
                self.pos += 1
            return float(self.text[start : self.pos])
        if ch.isalpha():
            start = self.pos
            while self.pos < len(self.text) and (
                self.text[self.pos].isalnum() or self.text[self.pos] == "_"
            ):
                self.pos += 1
            name = self.text[start : self.pos]
            if name not in self.variables:
                raise ValueError(f"unknown variable {name!r} (allowed: {self.variables})")
            return name
        raise ValueError(f"unexpected character {ch!r} in expression")


def parse_expression(text: str, variables=VARIABLE_NAMES) -> Callable:
    """Compile an arithmetic expression over named variables to a callable.

    Grammar: +, -, *, /, ^<integer>, parentheses, numeric literals.  The
    returned callable takes one positional argument per variable and works
    on floats, duals, and Taylor scalars alike.
    """
    tok = _Tokenizer(text, variables)
    tokens = []
    while True:
        t = tok.next_token()
        if t is None:
            break
        tokens.append(t)
    pos = [0]

    def peek():
        return tokens[pos[0]] if pos[0] < len(tokens) else None

    def take():
        t = peek()
        pos[0] += 1
        return t

    def parse_expr():
        node = parse_term()
        while peek() in ("+", "-"):
            op = take()
            rhs = parse_term()
            node = (op, node, rhs)
        return node

    def parse_term():
        node = parse_factor()
        while peek() in ("*", "/"):
            op = take()
            rhs = parse_factor()
            node = (op, node, rhs)
        return node

    def parse_factor():
        sign = 1
        while peek() in ("+", "-"):
            if take() == "-":
                sign = -sign
        node = parse_power()
        return node if sign > 0 else ("neg", node)

    def parse_power():
        base = parse_atom()
        if peek() == "^":
            take()
            esign = 1
            while peek() in ("+", "-"):
                if take() == "-":
                    esign = -esign
            e = take()
            if not isinstance(e, float) or e != int(e):
                raise ValueError("exponent must be an integer literal")
            return ("pow", base, esign * int(e))
        return base

    def parse_atom():
        t = take()
        if t == "(":
            node = parse_expr()
            if take() != ")":
                raise ValueError("unbalanced parentheses")
            return node
        if isinstance(t, float):
            return ("num", t)
        if t in variables:
            return ("var", variables.index(t))
        raise ValueError(f"unexpected token {t!r}")

    ast = parse_expr()
    if pos[0] != len(tokens):
        raise ValueError(f"trailing tokens near {tokens[pos[0]]!r}")

    def evaluate(*args):
        if len(args) != len(variables):
            raise TypeError(f"expression expects {len(variables)} arguments")

        def rec(node):
            kind = node[0]
            if kind == "num":
                return node[1]
            if kind == "var":
                return args[node[1]]
            if kind == "neg":
                return -rec(node[1])
            if kind == "pow":
                base = rec(node[1])
                e = node[2]
                if e >= 0:
                    return base**e
                return 1.0 / (base ** (-e))
            a, b = rec(node[1]), rec(node[2])
            if kind == "+":
                return a + b
            if kind == "-":
                return a - b
            if kind == "*":
                return a * b
            return a / b

        return rec(ast)

    return evaluate


def parse_symbol_expression(text: str) -> Callable:
    return parse_expression(text, VARIABLE_NAMES)


_DEFAULT_CUSTOM_REGION = Region(
    Box([-1.0, -1.0], [1.0, 1.0]), Box([-2.0, -2.0], [2.0, 2.0])
)


def make_custom_symbol(expression: str, region: Region = None, max_order=12) -> SymbolModel:
    fn = parse_symbol_expression(expression)
    return SymbolModel(
        id=f"custom:{expression}",
        eval_generic=fn,
        region=region or _DEFAULT_CUSTOM_REGION,
        max_order=max_order,
    )


def get_symbol(name: str) -> SymbolModel:
    """Resolve a symbol by config name."""
    if name == "torus_laplace":
        return make_torus_symbol()
    if name == "sphere_laplace":
        return make_sphere_symbol()
    if name == "hermite":
        return make_hermite_symbol()
    if name.startswith("custom:"):
        return make_custom_symbol(name[len("custom:") :])
    raise ValueError(f"unknown symbol {name!r}")


# -- admissibility ----------------------------------------------------------


@dataclass
class AdmissibilityReport:
    a1_min: float
    a2_min: float
    samples: int
    a1_pass: bool
    a2_pass: bool
    sign_consistent: bool
    skipped_rays: int

    @property
    def admissible(self):
        return self.a1_pass and self.a2_pass


def _zero_on_ray(sym: SymbolModel, x, center, direction, r_max, n_scan=160):
    """First zero of r -> p(x, center + r*direction) on (0, r_max], or None."""
    rs = np.linspace(0.0, r_max, n_scan + 1)[1:]
    vals = np.array([sym.eval_generic(x[0], x[1], *(center + r * direction)) for r in rs])
    # plateau of an identically-flat symbol along the ray
    hit = np.where(np.abs(vals) <= ZERO_SET_TOL)[0]
    if hit.size:
        return center + rs[hit[0]] * direction
    signs = np.sign(vals)
    flips = np.where(signs[:-1] * signs[1:] < 0)[0]
    if not flips.size:
        return None
    lo, hi = rs[flips[0]], rs[flips[0] + 1]
    flo = vals[flips[0]]
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        fmid = sym.eval_generic(x[0], x[1], *(center + mid * direction))
        if abs(fmid) <= ZERO_SET_TOL:
            return center + mid * direction
        if flo * fmid < 0:
            hi = mid
        else:
            lo, flo = mid, fmid
    return center + 0.5 * (lo + hi) * direction


def check_admissible(sym: SymbolModel, n_position=5, n_angle=32) -> AdmissibilityReport:
    """Sample the fiberwise zero sets and test the two admissibility conditions.

    For each sampled position x and ray direction, locate xi on the zero set
    of p(x, .) by radial bracketing from the frequency-box centroid, then
    record |d_xi p| and the tangential Hessian quadratic form <w, d_xi^2 p w>
    for the unit tangent w of the level set.
    """
    box_f = sym.region.frequency
    center = box_f.center
    half = 0.5 * (box_f.hi - box_f.lo)
    a1_vals, a2_vals = [], []
    skipped = 0
    for x in sym.region.position.grid(n_position):
        for j in range(n_angle):
            ang = 2.0 * math.pi * j / n_angle
            d = np.array([math.cos(ang), math.sin(ang)])
            scale = np.max(np.abs(d) / np.maximum(half, 1e-300))
            r_max = 1.0 / scale
            xi = _zero_on_ray(sym, x, center, d, r_max)
            if xi is None:
                skipped += 1
                continue
            pt = PhaseSpacePoint(x, xi)
            g = sym.grad_xi(pt)
            a1_vals.append(float(np.hypot(g[0], g[1])))
            if a1_vals[-1] > 0:
                w = np.array([-g[1], g[0]]) / a1_vals[-1]
            else:
                w = d
            h = sym.hess_xi(pt)
            a2_vals.append(float(w @ h @ w))
    if not a1_vals:
        raise DomainError("no zero-set points found in the region")
    a1_vals = np.array(a1_vals)
    a2_vals = np.array(a2_vals)
    consistent = bool(np.all(a2_vals > TOL_A2) or np.all(a2_vals < -TOL_A2))
    a2_min = float(np.min(np.abs(a2_vals))) if consistent else float(np.min(a2_vals))
    return AdmissibilityReport(
        a1_min=float(np.min(a1_vals)),
        a2_min=a2_min,
        samples=len(a1_vals),
        a1_pass=bool(np.min(a1_vals) > TOL_A1),
        a2_pass=bool(consistent and a2_min > TOL_A2),
        sign_consistent=consistent,
        skipped_rays=skipped,
    )


def transport_symbol(sym: SymbolModel, a, shift=(0.0, 0.0)) -> SymbolModel:
    """Push a symbol through the affine chart change y = A x + shift.

    The transported symbol q(y, eta) = p(A^-1 (y - shift), A^T eta) pairs with
    the cotangent lift, so contact orders computed in either chart agree.
    """
    a = np.asarray(a, dtype=float)
    shift = np.asarray(shift, dtype=float)
    inv = np.linalg.inv(a)

    def pull(y1, y2, e1, e2):
        x1 = inv[0, 0] * (y1 - shift[0]) + inv[0, 1] * (y2 - shift[1])
        x2 = inv[1, 0] * (y1 - shift[0]) + inv[1, 1] * (y2 - shift[1])
        xi1 = a[0, 0] * e1 + a[1, 0] * e2
        xi2 = a[0, 1] * e1 + a[1, 1] * e2
        return x1, x2, xi1, xi2

    def ev(y1, y2, e1, e2):
        return sym.eval_generic(*pull(y1, y2, e1, e2))

    def grad_y(y1, y2, e1, e2):
        g = sym.grad_x_any(*pull(y1, y2, e1, e2))
        return (inv[0, 0] * g[0] + inv[1, 0] * g[1], inv[0, 1] * g[0] + inv[1, 1] * g[1])

    def grad_eta(y1, y2, e1, e2):
        g = sym.grad_xi_any(*pull(y1, y2, e1, e2))
        return (a[0, 0] * g[0] + a[0, 1] * g[1], a[1, 0] * g[0] + a[1, 1] * g[1])

    pos = sym.region.position
    corners = np.array([[pos.lo[0], pos.lo[1]], [pos.lo[0], pos.hi[1]],
                        [pos.hi[0], pos.lo[1]], [pos.hi[0], pos.hi[1]]])
    mapped = corners @ a.T + shift
    freq = sym.region.frequency
    fcorners = np.array([[freq.lo[0], freq.lo[1]], [freq.lo[0], freq.hi[1]],
                         [freq.hi[0], freq.lo[1]], [freq.hi[0], freq.hi[1]]])
    fmapped = fcorners @ inv  # (A^T)^-1 = inv(A)^T acting on row vectors
    region = Region(
        Box(mapped.min(axis=0), mapped.max(axis=0)),
        Box(fmapped.min(axis=0), fmapped.max(axis=0)),
    )
    return SymbolModel(
        id=f"{sym.id}|affine",
        eval_generic=ev,
        region=region,
        max_order=sym.max_order,
        grad_x_generic=grad_y,
        grad_xi_generic=grad_eta,
    )


def eval_symbol(sym: SymbolModel, pt: PhaseSpacePoint) -> float:
    """Evaluate p at a phase-space point (module-level convenience)."""
    return sym.eval(pt)


def symbol_derivative(sym: SymbolModel, pt: PhaseSpacePoint, alpha) -> float:
    return sym.deriv(pt, alpha)
