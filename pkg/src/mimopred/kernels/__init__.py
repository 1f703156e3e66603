"""Hot numerical kernels with a compiled core and a numpy fallback.

The compiled extension ``_core`` is preferred. Set the environment variable
``MIMOPRED_PURE_PYTHON=1`` to force the fallback, e.g. for benchmarking or
on platforms without a C compiler.
"""
import os

from . import _fallback

_force_pure = os.environ.get("MIMOPRED_PURE_PYTHON", "") not in ("", "0")

if _force_pure:
    _impl = _fallback
    BACKEND = "python"
else:
    try:
        from . import _core as _impl
        BACKEND = "cython"
    except ImportError:
        _impl = _fallback
        BACKEND = "python"

synth_grid = _impl.synth_grid
smoothed_covariance = _impl.smoothed_covariance
zf_gains = _impl.zf_gains
greedy_zf = _impl.greedy_zf

__all__ = ["BACKEND", "synth_grid", "smoothed_covariance", "zf_gains",
           "greedy_zf"]
