"""Orthonormal spectral-cluster bases: torus exponentials, spherical
harmonics, and 2D oscillator eigenfunctions.

Torus: (2 pi)^-1 exp(i<k, x>) for lattice points k in the annulus
|k| in [lambda + w0, lambda + w1] over the fundamental domain [0, 2pi)^2.
Sphere: degree-l harmonics evaluated through fully normalized associated
Legendre recurrences with binary-exponent ledgers (stable to l = 5000).
Oscillator: products h_{n1}(x1) h_{n2}(x2) with n1 + n2 = n, eigenvalue
2n + 2, via the scaled recurrence kernels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import _kernels
from .errors import EmptyClusterError

TWO_PI = 2.0 * math.pi


@dataclass
class ClusterBasis:
    family: str
    level: float
    indices: np.ndarray
    dim: int
    meta: dict = field(default_factory=dict)

    def fill_matrix(self, points, dtype=None, layout="point_major") -> np.ndarray:
        """Basis values at a point batch.

        ``point_major`` returns (n_points, dim) for BLAS-friendly mat-vecs;
        ``dim_major`` the transpose.  dtype defaults to complex128 (torus,
        sphere) or float64 (oscillator).
        """
        points = np.asarray(points, dtype=float)
        if self.family == "torus":
            dtype = np.complex128 if dtype is None else dtype
            out = np.empty((len(points), self.dim), dtype=dtype)
            _kernels.torus_fill(self.indices.astype(np.float64), np.ascontiguousarray(points), out)
            out *= 1.0 / TWO_PI
            return out if layout == "point_major" else out.T
        if self.family == "hermite":
            dtype = np.float64 if dtype is None else dtype
            n = self.meta["n"]
            out = np.empty((self.dim, len(points)), dtype=dtype)
            _kernels.hermite_product_fill(
                n,
                np.ascontiguousarray(points[:, 0]),
                np.ascontiguousarray(points[:, 1]),
                out,
            )
            return out.T if layout == "point_major" else out
        if self.family == "sphere":
            dtype = np.complex128 if dtype is None else dtype
            out = _sphere_matrix(self.meta["l"], points).astype(dtype, copy=False)
            return out.T if layout == "point_major" else out
        raise ValueError(f"unknown family {self.family!r}")


def evaluate_basis(basis: ClusterBasis, points) -> np.ndarray:
    """Spec layout: (dim, n_points) array of basis values."""
    return basis.fill_matrix(points, layout="dim_major")


# -- torus ---------------------------------------------------------------------


def torus_cluster(lam: float, window=(-1.0, 1.0)) -> ClusterBasis:
    """Lattice points k with |k| in [lam + window[0], lam + window[1]]."""
    if lam < 5:
        raise ValueError("torus cluster needs lambda >= 5")
    lo = max(lam + window[0], 0.0)
    hi = lam + window[1]
    ks = enumerate_annulus(lo, hi)
    if len(ks) == 0:
        raise EmptyClusterError(f"no lattice points with |k| in [{lo}, {hi}]")
    return ClusterBasis(
        family="torus",
        level=float(lam),
        indices=ks,
        dim=len(ks),
        meta={"window": tuple(window), "lo": lo, "hi": hi},
    )


def enumerate_annulus(lo: float, hi: float) -> np.ndarray:
    """Integer points with lo <= |k| <= hi, by row scan over k1."""
    m_max = int(math.floor(hi))
    rows = []
    lo2, hi2 = lo * lo, hi * hi
    for m in range(-m_max, m_max + 1):
        outer = hi2 - m * m
        if outer < 0:
            continue
        n_hi = int(math.floor(math.sqrt(outer)))
        inner = lo2 - m * m
        if inner > 0:
            n_lo = math.sqrt(inner)
            start = int(math.ceil(n_lo))
            # guard roundoff at the boundary
            while start * start + m * m < lo2 - 1e-9:
                start += 1
            while start >= 1 and (start - 1) ** 2 + m * m >= lo2 - 1e-9:
                start -= 1
            if start > n_hi:
                continue
            for n in range(start, n_hi + 1):
                rows.append((m, n))
                rows.append((m, -n))
        else:
            for n in range(-n_hi, n_hi + 1):
                rows.append((m, n))
    ks = np.array(sorted(set(rows)), dtype=np.int64)
    if ks.size == 0:
        return np.zeros((0, 2), dtype=np.int64)
    r2 = (ks[:, 0].astype(float)) ** 2 + (ks[:, 1].astype(float)) ** 2
    keep = (r2 >= lo2 - 1e-9) & (r2 <= hi2 + 1e-9)
    return ks[keep]


# -- sphere ----------------------------------------------------------------------


def sphere_cluster(l: int) -> ClusterBasis:
    if not (1 <= l <= 5000):
        raise ValueError("sphere cluster supports 1 <= l <= 5000")
    ms = np.arange(-l, l + 1, dtype=np.int64)
    return ClusterBasis(
        family="sphere",
        level=math.sqrt(l * (l + 1.0)),
        indices=ms,
        dim=2 * l + 1,
        meta={"l": int(l)},
    )


def legendre_row(l: int, x: float) -> np.ndarray:
    """Fully normalized associated Legendre values P~_l^m(x) for m = 0..l.

    Normalization: integral over [0, pi] of P~_l^m(cos t)^2 sin t dt = 1.
    Upward recurrence in degree with per-column binary exponent ledgers, so
    the sectoral seeds u^m survive far below the double underflow point.
    """
    u = math.sqrt(max(0.0, 1.0 - x * x))
    p_prev = np.zeros(l + 1)  # degree l' - 1 values, index m
    p_curr = np.zeros(l + 1)  # degree l'
    expo = np.zeros(l + 1, dtype=np.int64)
    p_curr[0] = math.sqrt(0.5)
    for lp in range(1, l + 1):
        p_next = np.zeros(l + 1)
        m = np.arange(0, lp)
        a = np.sqrt((4.0 * lp * lp - 1.0) / (lp * lp - m * m))
        b = np.sqrt(((lp - 1.0) ** 2 - m * m) / (4.0 * (lp - 1.0) ** 2 - 1.0)) if lp >= 2 else np.zeros(1)
        p_next[:lp] = a * (x * p_curr[:lp] - b * p_prev[:lp])
        # sectoral seed at m = lp, carried on the ledger of column lp-1
        seed = math.sqrt((2.0 * lp + 1.0) / (2.0 * lp)) * u * p_curr[lp - 1]
        p_next[lp] = seed
        expo[lp] = expo[lp - 1]
        p_prev, p_curr = p_curr, p_next
        mant, sc = np.frexp(np.maximum(np.abs(p_curr), np.abs(p_prev)) + 1e-300)
        p_curr = np.ldexp(p_curr, -sc)
        p_prev = np.ldexp(p_prev, -sc)
        expo += sc
    return np.ldexp(p_curr, expo)


def _legendre_rows_at_points(l: int, xs: np.ndarray) -> np.ndarray:
    """(l+1, n_points) table of P~_l^m(xs) for m = 0..l (vectorized over points)."""
    n = len(xs)
    u = np.sqrt(np.maximum(0.0, 1.0 - xs * xs))
    p_prev = np.zeros((l + 1, n))
    p_curr = np.zeros((l + 1, n))
    expo = np.zeros((l + 1, n), dtype=np.int64)
    p_curr[0] = math.sqrt(0.5)
    for lp in range(1, l + 1):
        p_next = np.zeros((l + 1, n))
        m = np.arange(0, lp)[:, None]
        a = np.sqrt((4.0 * lp * lp - 1.0) / (lp * lp - m * m))
        b = (
            np.sqrt(((lp - 1.0) ** 2 - m * m) / (4.0 * (lp - 1.0) ** 2 - 1.0))
            if lp >= 2
            else np.zeros((1, 1))
        )
        p_next[:lp] = a * (xs[None, :] * p_curr[:lp] - b * p_prev[:lp])
        p_next[lp] = np.sqrt((2.0 * lp + 1.0) / (2.0 * lp)) * u * p_curr[lp - 1]
        expo[lp] = expo[lp - 1]
        p_prev, p_curr = p_curr, p_next
        mant, sc = np.frexp(np.maximum(np.abs(p_curr), np.abs(p_prev)) + 1e-300)
        p_curr = np.ldexp(p_curr, -sc)
        p_prev = np.ldexp(p_prev, -sc)
        expo += sc
    return np.ldexp(p_curr, expo)


def _sphere_matrix(l: int, points: np.ndarray) -> np.ndarray:
    """(2l+1, n_points) complex harmonics Y_l^m at chart points (theta, phi)."""
    theta = points[:, 0]
    phi = points[:, 1]
    table = _legendre_rows_at_points(l, np.cos(theta))  # (l+1, n), m = 0..l
    ms = np.arange(-l, l + 1)
    out = np.empty((2 * l + 1, len(theta)), dtype=np.complex128)
    norm = 1.0 / math.sqrt(TWO_PI)
    for idx, m in enumerate(ms):
        am = abs(m)
        row = table[am] * norm
        phase = np.exp(1j * m * phi)
        if m < 0:
            out[idx] = ((-1.0) ** am) * row * phase
        else:
            out[idx] = row * phase
    return out


# -- oscillator -------------------------------------------------------------------


def hermite_cluster(n: int) -> ClusterBasis:
    if not (0 <= n <= 6000):
        raise ValueError("hermite cluster supports 0 <= n <= 6000")
    n1 = np.arange(0, n + 1, dtype=np.int64)
    idx = np.stack([n1, n - n1], axis=1)
    return ClusterBasis(
        family="hermite",
        level=math.sqrt(2.0 * n + 2.0),
        indices=idx,
        dim=n + 1,
        meta={"n": int(n)},
    )


def hermite_1d(n: int, x, dtype=np.float64) -> np.ndarray:
    """(n+1, len(x)) table of 1D orthonormal oscillator functions."""
    x = np.ascontiguousarray(np.asarray(x, dtype=np.float64))
    out = np.empty((n + 1, len(x)), dtype=dtype)
    _kernels.hermite_table(n, x, out)
    return out
