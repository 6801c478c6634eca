"""Select the compiled kernels when available, else the numpy fallback.

Set ``NSDEFORM_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _fallback

BACKEND = "python"

if not os.environ.get("NSDEFORM_PURE_PYTHON"):
    try:
        from . import _core as _impl

        BACKEND = "compiled"
    except ImportError:
        _impl = _fallback
else:
    _impl = _fallback

pava_sorted = _impl.pava_sorted
kernel_moments = _impl.kernel_moments
leave_two_out = _impl.leave_two_out

__all__ = ["BACKEND", "pava_sorted", "kernel_moments", "leave_two_out"]
