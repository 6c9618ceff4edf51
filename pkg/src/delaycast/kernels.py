"""Backend selection for the split-search kernels.

Prefers the compiled extension; falls back to the numpy implementation
when the extension was not built. `BACKEND` records which one is active.
Set DELAYCAST_NO_EXT=1 to force the numpy fallback.
"""
import os

from . import _kernels_py

if os.environ.get("DELAYCAST_NO_EXT"):
    _impl = _kernels_py
    BACKEND = "numpy"
else:
    try:
        from . import _kernels_cy as _impl  # type: ignore[attr-defined]

        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py
        BACKEND = "numpy"

best_split_gini = _impl.best_split_gini
best_split_grad_hess = _impl.best_split_grad_hess
