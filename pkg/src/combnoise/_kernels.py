"""Hot numeric kernels with a numba fast path and a pure-numpy fallback.

The backend is selected once at import time from the ``COMBNOISE_BACKEND``
environment variable: ``numba`` (require the JIT), ``numpy`` (force the
fallback) or ``auto``/unset (numba when importable).  Both backends compute
the same quantities to floating-point accuracy; results are deterministic
within a backend, and no kernel uses threads, so outputs do not depend on
thread counts.

Kernels:
    trace_accum   out[k] += a0 + ac*cos(w t_k) + as*sin(w t_k)
    beat_accum    out[k] += wc*cos(w t_k + ph)*xc[k] + ws*sin(w t_k + ph)*xs[k]
    const_accum   out[k] += w*x[k]
"""

from __future__ import annotations

import math
import os

import numpy as np

__all__ = ["BACKEND", "trace_accum", "beat_accum", "const_accum", "get_backend"]


def _np_trace_accum(out, t, omega, a0, ac, as_):
    arg = omega * t
    out += a0 + ac * np.cos(arg) + as_ * np.sin(arg)


def _np_beat_accum(out, t, omega, phase, wc, xc, ws, xs):
    arg = omega * t + phase
    out += wc * np.cos(arg) * xc + ws * np.sin(arg) * xs


def _np_const_accum(out, w, x):
    out += w * x


_NUMPY_IMPL = {
    "trace_accum": _np_trace_accum,
    "beat_accum": _np_beat_accum,
    "const_accum": _np_const_accum,
}


def _build_numba_impl():
    from numba import njit

    @njit(cache=False)
    def _nb_trace_accum(out, t, omega, a0, ac, as_):
        for k in range(out.size):
            arg = omega * t[k]
            out[k] += a0 + ac * math.cos(arg) + as_ * math.sin(arg)

    @njit(cache=False)
    def _nb_beat_accum(out, t, omega, phase, wc, xc, ws, xs):
        for k in range(out.size):
            arg = omega * t[k] + phase
            out[k] += wc * math.cos(arg) * xc[k] + ws * math.sin(arg) * xs[k]

    @njit(cache=False)
    def _nb_const_accum(out, w, x):
        for k in range(out.size):
            out[k] += w * x[k]

    return {
        "trace_accum": _nb_trace_accum,
        "beat_accum": _nb_beat_accum,
        "const_accum": _nb_const_accum,
    }


def get_backend(name: str) -> dict:
    """Kernel table for an explicit backend name (used by the benchmark)."""
    if name == "numpy":
        return _NUMPY_IMPL
    if name == "numba":
        return _build_numba_impl()
    raise ValueError(f"unknown backend {name!r}")


_requested = os.environ.get("COMBNOISE_BACKEND", "auto").strip().lower()
if _requested in ("", "auto"):
    try:
        _IMPL = _build_numba_impl()
        BACKEND = "numba"
    except ImportError:
        _IMPL = _NUMPY_IMPL
        BACKEND = "numpy"
elif _requested == "numba":
    _IMPL = _build_numba_impl()
    BACKEND = "numba"
elif _requested == "numpy":
    _IMPL = _NUMPY_IMPL
    BACKEND = "numpy"
else:
    raise RuntimeError(f"COMBNOISE_BACKEND={_requested!r} is not one of auto|numba|numpy")

trace_accum = _IMPL["trace_accum"]
beat_accum = _IMPL["beat_accum"]
const_accum = _IMPL["const_accum"]
