"""Optional numba acceleration.

Set ``DEGENPARA_DISABLE_NUMBA=1`` to force the pure numpy/scipy kernels even
when numba is installed.
"""

import os

_DISABLED = os.environ.get("DEGENPARA_DISABLE_NUMBA", "").strip().lower() in ("1", "true", "yes", "on")

try:
    from numba import njit as _njit
except ImportError:  # pragma: no cover
    _njit = None

HAVE_NUMBA = _njit is not None
USE_NUMBA = HAVE_NUMBA and not _DISABLED


def njit(*args, **kwargs):
    """``numba.njit`` when numba is importable, otherwise an identity decorator."""
    if _njit is not None:
        return _njit(*args, **kwargs)
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]
    return lambda func: func
