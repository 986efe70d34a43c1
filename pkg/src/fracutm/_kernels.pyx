# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops. Signatures mirror :mod:`fracutm._fallback`."""
import numpy as np
cimport numpy as cnp
from libc.math cimport exp, cos, sin

cnp.import_array()


def exp_sum(double[::1] x, double complex[::1] k, double complex[::1] c):
    r"""Return :math:`\sum_j c_j e^{i k_j x_n}` for every ``x_n``."""
    cdef Py_ssize_t n = x.shape[0], m = k.shape[0], i, j
    cdef double xr, kr, ki, mag, ph, sr, si, cs, sn
    out = np.empty(n, dtype=np.complex128)
    cdef double complex[::1] o = out
    for i in range(n):
        xr = x[i]
        sr = 0.0
        si = 0.0
        for j in range(m):
            kr = k[j].real
            ki = k[j].imag
            mag = exp(-ki * xr)
            if mag == 0.0:
                continue
            ph = kr * xr
            cs = mag * cos(ph)
            sn = mag * sin(ph)
            sr += cs * c[j].real - sn * c[j].imag
            si += cs * c[j].imag + sn * c[j].real
        o[i] = sr + 1j * si
    return out


def exp_sum_abs(double[::1] x, double complex[::1] k, double complex[::1] c):
    r"""Return :math:`\sum_j |c_j e^{i k_j x_n}|` (roundoff scale of :func:`exp_sum`)."""
    cdef Py_ssize_t n = x.shape[0], m = k.shape[0], i, j
    cdef double s
    cdef double[::1] ac = np.abs(np.asarray(c))
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] o = out
    for i in range(n):
        s = 0.0
        for j in range(m):
            s += ac[j] * exp(-k[j].imag * x[i])
        o[i] = s
    return out


def causal_toeplitz(double[::1] b, double complex[::1] v):
    r"""Return :math:`o_i = \sum_{j=0}^{i} b_{i-j} v_j`."""
    cdef Py_ssize_t n = v.shape[0], i, j
    cdef double sr, si
    out = np.empty(n, dtype=np.complex128)
    cdef double complex[::1] o = out
    for i in range(n):
        sr = 0.0
        si = 0.0
        for j in range(i + 1):
            sr += b[i - j] * v[j].real
            si += b[i - j] * v[j].imag
        o[i] = sr + 1j * si
    return out
