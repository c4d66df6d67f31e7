"""Closed-form restriction exponents in exact rational arithmetic.

The growth rate of the cluster-projector norm on a curve of contact order
sigma, and every comparison baseline the package measures against.  All
values are Fractions; floats appear only at the reporting boundary.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Union

QLike = Union[int, float, str, Fraction]
INFINITY = math.inf

BASELINE_KEYS = ("bgt_low", "bgt_high", "bgt_curved", "tacy_flat", "tacy_transverse")


def parse_q(q: QLike):
    """Accept Fractions, ints, 'a/b' strings, floats, and 'inf'."""
    if isinstance(q, str):
        s = q.strip().lower()
        if s in ("inf", "infinity", "oo"):
            return INFINITY
        if "/" in s:
            num, den = s.split("/")
            return Fraction(int(num), int(den))
        return Fraction(s)
    if isinstance(q, float):
        if math.isinf(q):
            return INFINITY
        return Fraction(q).limit_denominator(10**9)
    return Fraction(q)


def parse_sigma(sigma):
    if isinstance(sigma, str):
        s = sigma.strip().lower()
        if s in ("inf", "infinity", "oo"):
            return INFINITY
        return int(s)
    if isinstance(sigma, float) and math.isinf(sigma):
        return INFINITY
    return int(sigma)


def _inv_q(q) -> Fraction:
    return Fraction(0) if q is INFINITY or (isinstance(q, float) and math.isinf(q)) else 1 / Fraction(q)


def transverse_exponent(q: QLike) -> Fraction:
    """Growth exponent when the flow meets the curve transversally."""
    q = parse_q(q)
    return Fraction(1, 2) - _inv_q(q)


def rho(q: QLike, sigma) -> Fraction:
    """The sharp projector-norm exponent for contact order sigma.

    Exact rational: (1 + sigma - 2/q) / (2 (2 sigma + 1)); the value is 1/4
    for the flow-line case sigma = infinity.  Inputs q outside [2, 4] are
    accepted with a warning (the sharp range is 2 <= q <= 4); sigma <= 0
    routes to the transverse baseline with a warning.
    """
    q = parse_q(q)
    sigma = parse_sigma(sigma)
    if q is not INFINITY and not (2 <= q <= 4):
        warnings.warn(f"q={q} outside the sharp range [2, 4]", stacklevel=2)
    if sigma is INFINITY:
        return Fraction(1, 4)
    if sigma <= 0:
        warnings.warn(
            "sigma <= 0: returning the transverse baseline exponent", stacklevel=2
        )
        return transverse_exponent(q)
    return Fraction(1, 2 * (2 * sigma + 1)) * (1 + sigma - 2 * _inv_q(q))


def baselines(q: QLike, d: int = 2) -> Dict[str, Fraction]:
    """All stated comparison exponents at dimension d (branch point q = 2d/(d-1))."""
    q = parse_q(q)
    if q is not INFINITY and q < 2:
        raise ValueError("q must be >= 2")
    invq = _inv_q(q)
    q_branch = Fraction(2 * d, d - 1)
    low = Fraction(d - 1, 4) - Fraction(d - 2, 2) * invq
    high = Fraction(d - 1, 2) - (d - 1) * invq
    out = {
        "bgt_low": low if (q is INFINITY and False) or (q is not INFINITY and q <= q_branch) else high,
        "bgt_high": high,
        "bgt_curved": Fraction(1, 3) - Fraction(1, 3) * invq,
        "tacy_flat": Fraction(1, 4) if (q is not INFINITY and q <= 4) else Fraction(1, 2) - invq,
        "tacy_transverse": Fraction(1, 2) - invq,
    }
    return out


def hermite_exponent(q: QLike, sigma) -> Fraction:
    """Exponent of the oscillator eigenfunction restricted to the dilated curve."""
    q = parse_q(q)
    return -1 + _inv_q(q) + 2 * rho(q, sigma)


@dataclass(frozen=True)
class ExponentPrediction:
    q: object
    sigma: object
    rho: Fraction
    hermite: Fraction
    baselines: Dict[str, Fraction]

    def row(self):
        def fmt(x):
            return str(x)

        return {
            "q": fmt(self.q),
            "sigma": "inf" if self.sigma is INFINITY else str(self.sigma),
            "rho": fmt(self.rho),
            "rho_float": float(self.rho),
            "hermite": fmt(self.hermite),
            "hermite_float": float(self.hermite),
            **{k: fmt(v) for k, v in self.baselines.items()},
        }


def predict(q: QLike, sigma) -> ExponentPrediction:
    qq = parse_q(q)
    ss = parse_sigma(sigma)
    return ExponentPrediction(
        q=qq,
        sigma=ss,
        rho=rho(qq, ss),
        hermite=hermite_exponent(qq, ss),
        baselines=baselines(qq),
    )
