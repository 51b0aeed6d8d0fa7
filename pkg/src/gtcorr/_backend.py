"""Select the kernel implementation at import time.

The compiled :mod:`gtcorr._kernels` is preferred. Setting the environment
variable ``GTCORR_PURE_PYTHON=1`` forces the pure-Python kernels, which is
also what happens when the extension was not built.
"""

import logging
import os

logger = logging.getLogger(__name__)

kernels = None
BACKEND = "python"

if os.environ.get("GTCORR_PURE_PYTHON", "") not in ("", "0"):
    from gtcorr import _pykernels as kernels
else:
    try:
        from gtcorr import _kernels as kernels

        BACKEND = "cython"
    except ImportError:
        logger.debug("compiled kernels unavailable; using pure-Python fallback")
        from gtcorr import _pykernels as kernels

__all__ = ["kernels", "BACKEND"]
