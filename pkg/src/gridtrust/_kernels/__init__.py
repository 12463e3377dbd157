"""Hot-loop kernels with backend selection.

The compiled Cython extension is preferred; the pure-Python reference
implementation is used when the extension is unavailable or when
``GRIDTRUST_PURE_PY`` is set in the environment. Both backends are
bit-identical (see tests/test_kernels.py and benchmarks/bench_kernels.py).
"""

import os

from . import _pykernels

if os.environ.get("GRIDTRUST_PURE_PY"):
    _impl = _pykernels
else:
    try:
        from . import _ckernels as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _pykernels

BACKEND = _impl.BACKEND
arma_innovations = _impl.arma_innovations
integrate_axes = _impl.integrate_axes

__all__ = ["BACKEND", "arma_innovations", "integrate_axes", "_pykernels"]
