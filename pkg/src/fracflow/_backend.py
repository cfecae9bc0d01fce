"""Select the compiled kernels when available, else the pure-Python ones.

Set ``FRACFLOW_BACKEND=python`` to force the fallback (used by the
benchmark and the backend-equivalence tests).
"""

import os

from . import _fallback

kernels = _fallback
BACKEND = "python"

if os.environ.get("FRACFLOW_BACKEND", "").lower() != "python":
    try:
        from . import _core
    except ImportError:  # extension not built
        pass
    else:
        kernels = _core
        BACKEND = "cython"

__all__ = ["kernels", "BACKEND"]
