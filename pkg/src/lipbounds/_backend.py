"""Select the kernel implementation at import time.

The compiled extension is preferred.  ``LIPBOUNDS_BACKEND=python`` forces the
numpy fallback; ``LIPBOUNDS_BACKEND=cython`` makes a missing extension an
import error instead of a silent fallback.
"""

import logging
import os

from . import _kernels_py

log = logging.getLogger(__name__)

_requested = os.environ.get("LIPBOUNDS_BACKEND", "").strip().lower()

if _requested == "python":
    kernels = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as kernels  # type: ignore[attr-defined]
        BACKEND = "cython"
    except ImportError:
        if _requested == "cython":
            raise
        log.debug("compiled kernels unavailable, using numpy fallback")
        kernels = _kernels_py
        BACKEND = "python"


def available_backends() -> dict:
    """Map backend name to kernel module for every importable backend."""
    found = {"python": _kernels_py}
    try:
        from . import _kernels
        found["cython"] = _kernels
    except ImportError:
        pass
    return found
