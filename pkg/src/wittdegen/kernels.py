"""Backend selection for the polynomial term kernels.

The compiled extension ``_kernels_c`` is used when it has been built;
otherwise the pure-Python implementation is loaded.  Setting the
environment variable ``WITTDEGEN_PURE_PYTHON=1`` forces the fallback.
"""

from __future__ import annotations

import os

BACKEND = "python"

if os.environ.get("WITTDEGEN_PURE_PYTHON", "") not in ("", "0"):
    from ._kernels_py import (  # noqa: F401
        accumulate, add_terms, finish, mul_terms, reduce_terms, scale_terms, shift_terms)
else:
    try:
        from ._kernels_c import (  # noqa: F401
            accumulate, add_terms, finish, mul_terms, reduce_terms, scale_terms, shift_terms)
        BACKEND = "cython"
    except ImportError:
        from ._kernels_py import (  # noqa: F401
            accumulate, add_terms, finish, mul_terms, reduce_terms, scale_terms, shift_terms)
