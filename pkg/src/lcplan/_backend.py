"""Select the kernel implementation at import time.

``LCPLAN_BACKEND=python`` forces the pure-Python kernels;
``LCPLAN_BACKEND=compiled`` makes a missing extension an ImportError.
"""
import os

from . import _pykernels

_requested = os.environ.get("LCPLAN_BACKEND", "auto").lower()
if _requested not in ("auto", "python", "compiled"):
    raise ImportError(f"LCPLAN_BACKEND must be auto, python or compiled, got {_requested!r}")

kernels = _pykernels
if _requested != "python":
    try:
        from . import _ckernels as kernels  # noqa: F811
    except ImportError:
        if _requested == "compiled":
            raise

NAME = "compiled" if kernels is not _pykernels else "python"

GRADIENT_SMALL = _pykernels.GRADIENT_SMALL
STEP_SMALL = _pykernels.STEP_SMALL
MAX_ITERATIONS = _pykernels.MAX_ITERATIONS
