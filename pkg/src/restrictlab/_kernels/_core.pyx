# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled fill kernels: torus plane waves and scaled Hermite recurrences.

These two fills dominate the runtime of the large restriction sweeps; the
numpy reference in `_ref.py` is interchangeable but slower and needs larger
temporaries.
"""

import numpy as np

cimport numpy as cnp
from cython.parallel cimport prange
from libc.math cimport cos, exp2, floor, frexp, ldexp, sin, sqrt
from libc.stdlib cimport free, malloc

cnp.import_array()

ctypedef fused complex_t:
    float complex
    double complex

ctypedef fused real_t:
    float
    double


def torus_fill(double[:, ::1] k, double[:, ::1] x, complex_t[:, ::1] out):
    """out[i, a] = exp(i <k_a, x_i>)."""
    cdef Py_ssize_t n = x.shape[0], dim = k.shape[0]
    cdef Py_ssize_t i, a
    cdef double ph, x0, x1
    for i in prange(n, nogil=True, schedule="static"):
        x0 = x[i, 0]
        x1 = x[i, 1]
        for a in range(dim):
            ph = k[a, 0] * x0 + k[a, 1] * x1
            out[i, a] = <complex_t> (cos(ph) + 1j * sin(ph))
    return np.asarray(out)


cdef void _hermite_column(Py_ssize_t n, double xv, double* vals) noexcept nogil:
    """vals[j] = h_j(xv), j = 0..n, with a running binary exponent ledger."""
    cdef double mant, prev, nxt, frac, g
    cdef int expo, eint, sc
    cdef Py_ssize_t j
    g = -xv * xv / (2.0 * 0.6931471805599453)  # log2 of the Gaussian factor
    eint = <int> floor(g)
    frac = g - eint
    mant = 0.7511255444649425 * exp2(frac)      # pi^(-1/4)
    expo = eint
    prev = 0.0
    vals[0] = ldexp(mant, expo)
    for j in range(n):
        nxt = sqrt(2.0 / (j + 1)) * xv * mant - sqrt(j / (j + 1.0)) * prev
        prev = mant
        mant = nxt
        if ((j + 1) & 31) == 0:
            frexp(max(abs(mant), abs(prev)) + 1e-300, &sc)
            mant = ldexp(mant, -sc)
            prev = ldexp(prev, -sc)
            expo += sc
        vals[j + 1] = ldexp(mant, expo)


def hermite_table(Py_ssize_t n, double[::1] x, real_t[:, ::1] out):
    """out[j, i] = h_j(x_i) for j = 0..n (columns computed independently)."""
    cdef Py_ssize_t m = x.shape[0]
    cdef Py_ssize_t i, j
    cdef double* col
    for i in prange(m, nogil=True, schedule="static"):
        col = <double*> malloc((n + 1) * sizeof(double))
        if col != NULL:
            _hermite_column(n, x[i], col)
            for j in range(n + 1):
                out[j, i] = <real_t> col[j]
            free(col)
    return np.asarray(out)


def hermite_product_fill(Py_ssize_t n, double[::1] x1, double[::1] x2, real_t[:, ::1] out):
    """out[a, i] = h_a(x1_i) h_{n-a}(x2_i): the level-n oscillator cluster."""
    cdef Py_ssize_t m = x1.shape[0]
    cdef Py_ssize_t i, j
    cdef double* c1
    cdef double* c2
    for i in prange(m, nogil=True, schedule="static"):
        c1 = <double*> malloc(2 * (n + 1) * sizeof(double))
        if c1 != NULL:
            c2 = c1 + (n + 1)
            _hermite_column(n, x1[i], c1)
            _hermite_column(n, x2[i], c2)
            for j in range(n + 1):
                out[j, i] = <real_t> (c1[j] * c2[n - j])
            free(c1)
    return np.asarray(out)
