"""Pure-numpy reference implementations of the hot fill kernels.

Selected automatically when the compiled extension is unavailable or when
RESTRICTLAB_NO_EXT=1.  Semantics must match `_core` bit-for-bit up to
floating-point reassociation; the parity tests in tests/test_kernels.py
hold both backends to that.
"""

from __future__ import annotations

import numpy as np

_CHUNK = 4096
_RENORM_EVERY = 24


def torus_fill(k, x, out):
    """out[i, a] = exp(i <k_a, x_i>), chunked over points to bound temporaries."""
    k = np.asarray(k, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    n = x.shape[0]
    for start in range(0, n, _CHUNK):
        stop = min(start + _CHUNK, n)
        phase = x[start:stop] @ k.T
        block = np.exp(1j * phase)
        out[start:stop] = block if out.dtype == np.complex128 else block.astype(out.dtype)
    return out


def _renormalize(mant, expo):
    m, e = np.frexp(mant)
    np.add(expo, e, out=expo)
    return m


def hermite_table(n, x, out):
    """out[j, i] = h_j(x_i) for the orthonormal oscillator functions, j = 0..n.

    Three-term recurrence on mantissas with a per-point binary exponent
    ledger; the Gaussian ground-state factor enters through the ledger so
    the table stays finite for |x| far beyond the underflow point of
    exp(-x^2/2).
    """
    x = np.asarray(x, dtype=np.float64)
    mant = np.full_like(x, np.pi ** -0.25)
    expo = np.zeros(x.shape, dtype=np.int64)
    # exponent of exp(-x^2/2) = 2^(-x^2/(2 ln 2)); split integer/fraction
    log2_gauss = -x * x / (2.0 * np.log(2.0))
    eint = np.floor(log2_gauss).astype(np.int64)
    mant = mant * np.exp2(log2_gauss - eint)
    expo += eint
    prev = np.zeros_like(mant)
    out[0] = np.ldexp(mant, expo)
    for j in range(n):
        c1 = np.sqrt(2.0 / (j + 1))
        c2 = np.sqrt(j / (j + 1.0))
        nxt = c1 * x * mant - c2 * prev
        prev, mant = mant, nxt
        if (j + 1) % _RENORM_EVERY == 0:
            scale_m, scale_e = np.frexp(np.maximum(np.abs(mant), np.abs(prev)) + 1e-300)
            mant = np.ldexp(mant, -scale_e)
            prev = np.ldexp(prev, -scale_e)
            expo += scale_e
        out[j + 1] = np.ldexp(mant, expo)
    return out


def hermite_product_fill(n, x1, x2, out):
    """out[a, i] = h_a(x1_i) * h_{n-a}(x2_i), the 2D cluster basis at level n.

    Fills the x1 table into `out` row-by-row, then multiplies rolling values
    of h_j(x2) into row n - j, so no second table is materialized.
    """
    hermite_table(n, x1, out)
    x2 = np.asarray(x2, dtype=np.float64)
    mant = np.full_like(x2, np.pi ** -0.25)
    expo = np.zeros(x2.shape, dtype=np.int64)
    log2_gauss = -x2 * x2 / (2.0 * np.log(2.0))
    eint = np.floor(log2_gauss).astype(np.int64)
    mant = mant * np.exp2(log2_gauss - eint)
    expo += eint
    prev = np.zeros_like(mant)
    out[n] *= np.ldexp(mant, expo)
    for j in range(n):
        c1 = np.sqrt(2.0 / (j + 1))
        c2 = np.sqrt(j / (j + 1.0))
        nxt = c1 * x2 * mant - c2 * prev
        prev, mant = mant, nxt
        if (j + 1) % _RENORM_EVERY == 0:
            scale_m, scale_e = np.frexp(np.maximum(np.abs(mant), np.abs(prev)) + 1e-300)
            mant = np.ldexp(mant, -scale_e)
            prev = np.ldexp(prev, -scale_e)
            expo += scale_e
        out[n - (j + 1)] *= np.ldexp(mant, expo)
    return out
