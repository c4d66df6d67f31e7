"""Exact rational polynomial families behind the phase-difference analysis.

Everything here is integer/rational arithmetic: the two-variable polynomial
``p_sigma``, the one-variable families ``wp(sigma, 1)`` / ``wp(sigma, 2)``
and their ``wp_tilde`` companions, their mirror/derivative identities, and
Sturm-sequence real-root isolation used to certify root counts and the root
ordering.  Floats appear only when reporting refined root positions.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Tuple


@dataclass(frozen=True)
class PolynomialExact:
    """Dense univariate polynomial with Fraction coefficients, ascending degree."""

    coeffs: Tuple[Fraction, ...]

    @classmethod
    def make(cls, coeffs) -> "PolynomialExact":
        cs = [Fraction(c) for c in coeffs]
        while len(cs) > 1 and cs[-1] == 0:
            cs.pop()
        return cls(tuple(cs))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coeffs)

    def __add__(self, other):
        n = max(len(self.coeffs), len(other.coeffs))
        a = list(self.coeffs) + [Fraction(0)] * (n - len(self.coeffs))
        b = list(other.coeffs) + [Fraction(0)] * (n - len(other.coeffs))
        return PolynomialExact.make([x + y for x, y in zip(a, b)])

    def __sub__(self, other):
        return self + other.scale(Fraction(-1))

    def scale(self, c) -> "PolynomialExact":
        c = Fraction(c)
        return PolynomialExact.make([c * a for a in self.coeffs])

    def __mul__(self, other):
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a == 0:
                continue
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return PolynomialExact.make(out)

    def derivative(self) -> "PolynomialExact":
        if self.degree == 0:
            return PolynomialExact.make([0])
        return PolynomialExact.make(
            [i * c for i, c in enumerate(self.coeffs)][1:]
        )

    def eval(self, x):
        """Horner evaluation; exact for Fraction inputs."""
        acc = self.coeffs[-1]
        for c in self.coeffs[-2::-1]:
            acc = acc * x + c
        return acc

    def eval_float(self, x: float) -> float:
        acc = float(self.coeffs[-1])
        for c in self.coeffs[-2::-1]:
            acc = acc * x + float(c)
        return acc

    def divmod(self, other):
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        dq = len(rem) - len(other.coeffs)
        if dq < 0:
            return PolynomialExact.make([0]), self
        quot = [Fraction(0)] * (dq + 1)
        lead = other.coeffs[-1]
        for k in range(dq, -1, -1):
            q = rem[k + other.degree] / lead
            quot[k] = q
            if q != 0:
                for j, b in enumerate(other.coeffs):
                    rem[k + j] -= q * b
        return PolynomialExact.make(quot), PolynomialExact.make(rem[: other.degree] or [0])


def _binomial(n, k):
    return math.comb(n, k)


# -- the polynomial families --------------------------------------------------


def p_sigma(sigma: int, u, v, path: str = "both"):
    """The universal gap polynomial, by its defining sum and by its closed form.

    With ``path='both'`` the two evaluations are compared exactly and their
    common value returned.
    """
    if sigma < 1:
        raise ValueError("sigma must be >= 1")
    u = Fraction(u)
    v = Fraction(v)
    val_sum = val_closed = None
    if path in ("sum", "both"):
        val_sum = Fraction(0)
        for j in range(2, sigma + 2):
            val_sum += (v - u) ** j * u ** (sigma + 1 - j) / (
                Fraction(math.factorial(j) * math.factorial(sigma + 1 - j))
            )
    if path in ("closed", "both"):
        val_closed = (
            v ** (sigma + 1) - (sigma + 1) * (v - u) * u**sigma - u ** (sigma + 1)
        ) / Fraction(math.factorial(sigma + 1))
    if path == "sum":
        return val_sum
    if path == "closed":
        return val_closed
    if val_sum != val_closed:
        raise AssertionError(
            f"p_sigma paths disagree at sigma={sigma}, u={u}, v={v}"
        )
    return val_sum


def p_sigma_float(sigma: int, u: float, v: float) -> float:
    """Float evaluation via the graded sum (cancellation-free term products)."""
    acc = 0.0
    dv = v - u
    for j in range(2, sigma + 2):
        acc += dv**j * u ** (sigma + 1 - j) / (
            math.factorial(j) * math.factorial(sigma + 1 - j)
        )
    return acc


def wp(sigma: int, branch: int) -> PolynomialExact:
    """The degree sigma-1 factor polynomials of the gap product, branch 1 or 2."""
    if sigma < 1:
        raise ValueError("sigma must be >= 1")
    if branch not in (1, 2):
        raise ValueError("branch must be 1 or 2")
    n = sigma + 1
    fact = Fraction(1, math.factorial(n))
    coeffs = [Fraction(0)] * (n + 1)
    if branch == 1:
        # (1+tau)^{sigma+1} - tau^{sigma+1} - (sigma+1) tau^sigma
        for k in range(n + 1):
            coeffs[k] += _binomial(n, k)
        coeffs[n] -= 1
        coeffs[n - 1] -= n
    else:
        # tau^{sigma+1} + (sigma+1)(1+tau)^sigma - (1+tau)^{sigma+1}
        coeffs[n] += 1
        for k in range(n):
            coeffs[k] += n * _binomial(n - 1, k)
        for k in range(n + 1):
            coeffs[k] -= _binomial(n, k)
    return PolynomialExact.make([fact * c for c in coeffs])


def wp_tilde(sigma: int, branch: int) -> PolynomialExact:
    """(1 + tau) times the order sigma-1 family member."""
    if sigma < 2:
        raise ValueError("wp_tilde needs sigma >= 2")
    return PolynomialExact.make([1, 1]) * wp(sigma - 1, branch)


def _compose_negshift(p: PolynomialExact) -> PolynomialExact:
    """p(-tau - 1) exactly."""
    # Horner in the polynomial ring with inner polynomial -1 - tau
    inner = PolynomialExact.make([-1, -1])
    acc = PolynomialExact.make([p.coeffs[-1]])
    for c in p.coeffs[-2::-1]:
        acc = acc * inner + PolynomialExact.make([c])
    return acc


@dataclass
class IdentityReport:
    sigma_max: int
    mirror_ok: bool
    derivative_ok: bool
    chainrule_ok: bool
    failures: List[str]

    @property
    def all_ok(self):
        return self.mirror_ok and self.derivative_ok and self.chainrule_ok


def check_wp_identities(sigma_max: int, rng_seed: int = 7) -> IdentityReport:
    """Verify the mirror identity, the derivative ladder, and the chain rule.

    Mirror: wp(sigma,1)(tau) = (-1)^(sigma+1) wp(sigma,2)(-tau-1), checked
    coefficient-wise.  Ladder: wp(sigma,i)' = wp(sigma-1,i).  Chain rule:
    d/du wp(sigma,i)(u/(v-u)) = (v-u)^(-1) wp_tilde(sigma,i)(u/(v-u)) at
    random rational (u, v).
    """
    if sigma_max > 40:
        raise ValueError("sigma_max capped at 40 (coefficient growth)")
    failures = []
    mirror_ok = derivative_ok = chainrule_ok = True
    rng = random.Random(rng_seed)
    for sigma in range(2, sigma_max + 1):
        for branch in (1, 2):
            p1 = wp(sigma, 1)
            p2m = _compose_negshift(wp(sigma, 2)).scale(Fraction((-1) ** (sigma + 1)))
            if p1.coeffs != p2m.coeffs:
                mirror_ok = False
                failures.append(f"mirror sigma={sigma}")
            d = wp(sigma, branch).derivative()
            lower = wp(sigma - 1, branch)
            if d.coeffs != lower.coeffs:
                derivative_ok = False
                failures.append(f"derivative sigma={sigma} branch={branch}")
    for _ in range(20):
        sigma = rng.randint(2, max(2, min(sigma_max, 12)))
        branch = rng.choice((1, 2))
        u = Fraction(rng.randint(-20, 20), rng.randint(1, 20))
        v = Fraction(rng.randint(-20, 20), rng.randint(1, 20))
        if v == u or v == 0:
            continue
        tau = u / (v - u)
        if tau == -1:
            continue
        # d/du [wp(tau(u))] with tau(u) = u/(v-u): tau'(u) = v/(v-u)^2
        lhs = wp(sigma, branch).derivative().eval(tau) * v / (v - u) ** 2
        rhs = wp_tilde(sigma, branch).eval(tau) / (v - u)
        if lhs != rhs:
            chainrule_ok = False
            failures.append(f"chainrule sigma={sigma} branch={branch} u={u} v={v}")
    return IdentityReport(sigma_max, mirror_ok, derivative_ok, chainrule_ok, failures)


# -- Sturm real-root isolation --------------------------------------------------


def _poly_gcd(a: PolynomialExact, b: PolynomialExact) -> PolynomialExact:
    while not b.is_zero():
        _, r = a.divmod(b)
        a, b = b, r
    if a.is_zero():
        return PolynomialExact.make([1])
    return a.scale(1 / a.coeffs[-1])


def squarefree_part(p: PolynomialExact) -> PolynomialExact:
    g = _poly_gcd(p, p.derivative())
    if g.degree == 0:
        return p
    q, r = p.divmod(g)
    assert r.is_zero()
    return q


def sturm_sequence(p: PolynomialExact) -> List[PolynomialExact]:
    seq = [p, p.derivative()]
    while not seq[-1].is_zero() and seq[-1].degree > 0:
        _, r = seq[-2].divmod(seq[-1])
        if r.is_zero():
            break
        seq.append(r.scale(-1))
    return seq


def _sign_variations(seq, x) -> int:
    signs = []
    for p in seq:
        v = p.eval(x)
        if v != 0:
            signs.append(1 if v > 0 else -1)
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def count_real_roots(p: PolynomialExact, lo, hi) -> int:
    """Number of distinct real roots in (lo, hi], by Sturm's theorem."""
    sf = squarefree_part(p)
    seq = sturm_sequence(sf)
    return _sign_variations(seq, Fraction(lo)) - _sign_variations(seq, Fraction(hi))


def real_roots(p: PolynomialExact, refine_to: float = 1e-12):
    """Isolating rational intervals and refined float values of all real roots."""
    sf = squarefree_part(p)
    if sf.degree == 0:
        return []
    seq = sturm_sequence(sf)
    lead = abs(sf.coeffs[-1])
    bound = Fraction(1) + max(abs(c) for c in sf.coeffs[:-1]) / lead if sf.degree > 0 else Fraction(1)

    out = []

    def recurse(lo, hi):
        n = _sign_variations(seq, lo) - _sign_variations(seq, hi)
        if n == 0:
            return
        if n == 1:
            out.append((lo, hi))
            return
        mid = (lo + hi) / 2
        if sf.eval(mid) == 0:
            out.append((mid, mid))
            eps = (hi - lo) / Fraction(10**6)
            recurse(lo, mid - eps)
            recurse(mid + eps, hi)
            return
        recurse(lo, mid)
        recurse(mid, hi)

    recurse(-bound, bound)
    out.sort(key=lambda iv: iv[0])

    refined = []
    for lo, hi in out:
        if lo == hi:
            refined.append((lo, hi, float(lo)))
            continue
        flo = sf.eval(lo)
        if flo == 0:
            refined.append((lo, lo, float(lo)))
            continue
        while float(hi - lo) > refine_to:
            mid = (lo + hi) / 2
            fm = sf.eval(mid)
            if fm == 0:
                lo = hi = mid
                break
            if (fm > 0) == (flo > 0):
                lo, flo = mid, fm
            else:
                hi = mid
        refined.append((lo, hi, float((lo + hi) / 2)))
    return refined


def wp_real_roots(sigma: int, branch: int, refine_to: float = 1e-12):
    """Real roots (isolating intervals + refined floats) of the family member."""
    return real_roots(wp(sigma, branch), refine_to)


@dataclass
class CriticalValueReport:
    sigma: int
    n_critical: int
    exact_remainder_zero: bool
    max_rel_residual: float
    ok: bool


def check_critical_values(sigma: int, rtol: float = 1e-10) -> CriticalValueReport:
    """At each real critical point of wp(sigma,1), check the closed-form value.

    The claim: at roots tau1 of wp(sigma,1)', the value equals
    sigma/(sigma+1)! * tau1^(sigma-1).  Verified two ways: exactly, as a zero
    polynomial remainder modulo the derivative; and numerically at each
    refined real critical point.
    """
    if sigma < 2:
        raise ValueError("needs sigma >= 2")
    p = wp(sigma, 1)
    dp = p.derivative()
    target = [Fraction(0)] * sigma
    target[sigma - 1] = Fraction(sigma, math.factorial(sigma + 1))
    diff = p - PolynomialExact.make(target)
    if dp.degree >= 1:
        _, rem = diff.divmod(squarefree_part(dp))
        exact_zero = rem.is_zero()
        roots = real_roots(dp)
    else:
        exact_zero = True  # no critical points: vacuous
        roots = []
    max_rel = 0.0
    c = sigma / math.factorial(sigma + 1)
    for _lo, _hi, r in roots:
        lhs = p.eval_float(r)
        rhs = c * r ** (sigma - 1)
        rel = abs(lhs - rhs) / max(abs(rhs), 1e-300)
        max_rel = max(max_rel, rel)
    return CriticalValueReport(
        sigma=sigma,
        n_critical=len(roots),
        exact_remainder_zero=exact_zero,
        max_rel_residual=max_rel,
        ok=exact_zero and max_rel <= rtol,
    )


def polylab_report(sigma_max: int = 20) -> dict:
    """Bundled verification report used by the command-line front end."""
    ident = check_wp_identities(min(sigma_max, 40))
    roots_summary = []
    roots_ok = True
    for sigma in range(1, sigma_max + 1):
        entry = {"sigma": sigma}
        for branch in (1, 2):
            rts = wp_real_roots(sigma, branch)
            entry[f"roots_branch{branch}"] = [r for _, _, r in rts]
            expected = 0 if sigma % 2 == 1 else 1
            if len(rts) != expected:
                roots_ok = False
        if sigma % 2 == 0:
            t1 = entry["roots_branch1"][0]
            t2 = entry["roots_branch2"][0]
            if not (-1.0 < t2 < -0.5 < t1 < 0.0):
                roots_ok = False
                entry["ordering_violated"] = True
        roots_summary.append(entry)
    critical = [check_critical_values(s) for s in range(2, sigma_max + 1)]
    return {
        "sigma_max": sigma_max,
        "identities": {
            "mirror_ok": ident.mirror_ok,
            "derivative_ok": ident.derivative_ok,
            "chainrule_ok": ident.chainrule_ok,
            "failures": ident.failures,
        },
        "root_counts_ok": roots_ok,
        "roots": roots_summary,
        "critical_values_ok": all(c.ok for c in critical),
        "critical_values": [
            {
                "sigma": c.sigma,
                "n_critical": c.n_critical,
                "exact_remainder_zero": c.exact_remainder_zero,
                "max_rel_residual": c.max_rel_residual,
            }
            for c in critical
        ],
        "all_ok": ident.all_ok and roots_ok and all(c.ok for c in critical),
    }
