"""Backend selection for the pairwise kernel sums.

The compiled extension is used when importable. Setting
``NONLOCAL_LAB_PURE=1`` forces the numpy fallback.
"""
import importlib
import os

from . import _fallback

METRIC_TORUS = 0
METRIC_SPHERE = 1
METRIC_MATRIX = 2

_core = None
if os.environ.get("NONLOCAL_LAB_PURE", "") not in ("1", "true", "yes"):
    try:
        _core = importlib.import_module(__name__ + "._core")
    except ImportError:  # extension not built
        _core = None

BACKEND = "compiled" if _core is not None else "numpy"


def get_backend(name=None):
    """Return the kernel module for ``name`` ('compiled', 'numpy' or None for the default)."""
    if name is None:
        name = BACKEND
    if name == "compiled":
        if _core is None:
            raise RuntimeError("compiled extension is not available")
        return _core
    if name == "numpy":
        return _fallback
    raise ValueError(f"unknown backend {name!r}")


def default_threads():
    env = os.environ.get("NONLOCAL_LAB_THREADS")
    if env:
        try:
            value = int(env)
        except ValueError:
            raise ValueError(f"NONLOCAL_LAB_THREADS must be an integer, got {env!r}") from None
        return max(1, value)
    return os.cpu_count() or 1
