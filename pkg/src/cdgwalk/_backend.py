"""Select the kernel implementation at import.

The compiled ``_kernels`` extension is used when it was built; otherwise,
or when ``CDG_PURE_PYTHON`` is set to a non-empty value, the numpy
fallback in ``_fallback`` is used.
"""

import os

from . import _fallback

if os.environ.get("CDG_PURE_PYTHON"):
    kernels = _fallback
    BACKEND = "python"
else:
    try:
        from . import _kernels as kernels
        BACKEND = "cython"
    except ImportError:
        kernels = _fallback
        BACKEND = "python"
