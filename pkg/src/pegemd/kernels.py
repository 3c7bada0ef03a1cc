"""Kernel selection.

The compiled extension is used when it imports; otherwise the pure-Python
fallback is used. Setting ``PEGEMD_PURE_PYTHON=1`` forces the fallback.
"""

import os

from . import _pykernels as python

if os.environ.get("PEGEMD_PURE_PYTHON", "") not in ("", "0"):
    compiled = None
else:
    try:
        from . import _kernels as compiled
    except ImportError:  # extension not built
        compiled = None

impl = compiled if compiled is not None else python
BACKEND = "cython" if compiled is not None else "python"

bfs = impl.bfs
peel = impl.peel
spa = impl.spa
count_cycles = impl.count_cycles
