"""Kernel selection: compiled extension when importable, pure Python otherwise.

Set ``JOINSHARE_PURE_PYTHON=1`` to force the fallback.
"""

from __future__ import annotations

import os

from . import _kernels_py

IMPLEMENTATION = "python"
build_table = _kernels_py.build_table
probe_table = _kernels_py.probe_table
take = _kernels_py.take

if os.environ.get("JOINSHARE_PURE_PYTHON", "") in ("", "0"):
    try:
        from . import _hashjoin
    except ImportError:  # extension not built
        _hashjoin = None
    if _hashjoin is not None:
        IMPLEMENTATION = "cython"
        build_table = _hashjoin.build_table
        probe_table = _hashjoin.probe_table
        take = _hashjoin.take
