"""Kernel dispatch: compiled extension if importable, numpy fallback otherwise.

Set ``FRACUTM_PURE=1`` to force the fallback.
"""
import os

from . import _fallback

BACKEND = "python"
exp_sum = _fallback.exp_sum
exp_sum_abs = _fallback.exp_sum_abs
causal_toeplitz = _fallback.causal_toeplitz

if os.environ.get("FRACUTM_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _ext
    except ImportError:  # pragma: no cover - depends on build
        pass
    else:
        import numpy as _np

        def exp_sum(x, k, c):  # noqa: F811
            return _ext.exp_sum(_np.ascontiguousarray(x, dtype=_np.float64),
                                _np.ascontiguousarray(k, dtype=_np.complex128),
                                _np.ascontiguousarray(c, dtype=_np.complex128))

        def exp_sum_abs(x, k, c):  # noqa: F811
            return _ext.exp_sum_abs(_np.ascontiguousarray(x, dtype=_np.float64),
                                    _np.ascontiguousarray(k, dtype=_np.complex128),
                                    _np.ascontiguousarray(c, dtype=_np.complex128))

        def causal_toeplitz(b, v):  # noqa: F811
            v = _np.ascontiguousarray(v, dtype=_np.complex128)
            b = _np.ascontiguousarray(b[:v.size], dtype=_np.float64)
            return _ext.causal_toeplitz(b, v)

        BACKEND = "cython"
