"""Backend selection for the hot kernels.

The compiled ``_ext`` module is used when it was built; otherwise, or when
``IRSNAV_PURE_PYTHON=1`` is set, the numpy fallback in ``_kernels_py`` is
used. ``BACKEND`` names the active one.
"""
import os

from . import _kernels_py

if os.environ.get("IRSNAV_PURE_PYTHON", "") not in ("", "0"):
    _impl = _kernels_py
else:
    try:
        from . import _ext as _impl
    except ImportError:  # extension not built
        _impl = _kernels_py

BACKEND = "cython" if _impl is not _kernels_py else "python"

cascade_sums = _impl.cascade_sums
mc_power_moments = _impl.mc_power_moments
grid_dijkstra = _impl.grid_dijkstra


def backends():
    """Mapping of available backend name to kernel module."""
    out = {"python": _kernels_py}
    try:
        from . import _ext
        out["cython"] = _ext
    except ImportError:
        pass
    return out
