"""Hot fill kernels with a compiled core and a numpy fallback.

The compiled extension is preferred when importable; set RESTRICTLAB_NO_EXT=1
to force the pure-numpy path (used by the parity tests and the benchmark).
``BACKEND`` records which implementation is active.
"""

import os

from . import _ref

if os.environ.get("RESTRICTLAB_NO_EXT", "") == "1":
    _impl = _ref
    BACKEND = "python"
else:
    try:
        from . import _core as _impl

        BACKEND = "cython"
    except ImportError:
        _impl = _ref
        BACKEND = "python"

torus_fill = _impl.torus_fill
hermite_table = _impl.hermite_table
hermite_product_fill = _impl.hermite_product_fill

__all__ = ["torus_fill", "hermite_table", "hermite_product_fill", "BACKEND"]
