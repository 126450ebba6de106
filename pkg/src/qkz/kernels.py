"""Backend selection for the integer convolution kernel.

The compiled extension is used when it was built; otherwise the pure-Python
implementation is used.  Set ``QKZ_PURE_PYTHON=1`` to force the fallback.
"""

from __future__ import annotations

import os

from qkz import _kernels_py

if os.environ.get("QKZ_PURE_PYTHON"):
    _compiled = None
else:
    try:
        from qkz import _ckernels as _compiled
    except ImportError:  # extension not built
        _compiled = None

if _compiled is not None:
    int_convolve = _compiled.int_convolve
    BACKEND = "compiled"
else:
    int_convolve = _kernels_py.int_convolve
    BACKEND = "python"

python_convolve = _kernels_py.int_convolve
compiled_convolve = _compiled.int_convolve if _compiled is not None else None

__all__ = ["int_convolve", "python_convolve", "compiled_convolve", "BACKEND"]
