"""Pure numpy versions of the compiled kernels in ``_kernels.pyx``."""
import numpy as np

_CHUNK = 1 << 21


def exp_sum(x, k, c):
    r"""Return :math:`\sum_j c_j e^{i k_j x_n}` for every ``x_n``."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    k = np.ascontiguousarray(k, dtype=np.complex128)
    c = np.ascontiguousarray(c, dtype=np.complex128)
    out = np.empty(x.size, dtype=np.complex128)
    step = max(1, _CHUNK // max(k.size, 1))
    for s in range(0, x.size, step):
        xs = x[s:s + step]
        out[s:s + step] = np.exp(1j * np.outer(xs, k)) @ c
    return out


def exp_sum_abs(x, k, c):
    r"""Return :math:`\sum_j |c_j e^{i k_j x_n}|`."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    k = np.ascontiguousarray(k, dtype=np.complex128)
    ac = np.abs(np.asarray(c, dtype=np.complex128))
    out = np.empty(x.size)
    step = max(1, _CHUNK // max(k.size, 1))
    for s in range(0, x.size, step):
        xs = x[s:s + step]
        out[s:s + step] = np.exp(-np.outer(xs, k.imag)) @ ac
    return out


def causal_toeplitz(b, v):
    r"""Return :math:`o_i = \sum_{j=0}^{i} b_{i-j} v_j`."""
    b = np.asarray(b, dtype=np.float64)
    v = np.asarray(v, dtype=np.complex128)
    n = v.size
    return np.convolve(b[:n], v)[:n]
