"""Hot-kernel dispatch: compiled extension when importable, numpy otherwise.

Set ``S2VAUDIT_BACKEND=python`` to force the numpy fallback. The attention
backward pass stays on numpy even with the extension: its batched matmuls
reach BLAS and beat the compiled loops (see ``benchmarks/bench_kernels.py``).
"""

import os

from . import _pykernels as python

native = None
if os.environ.get("S2VAUDIT_BACKEND", "").lower() != "python":
    try:
        from . import _ckernels as native
    except ImportError:  # extension not built
        native = None

_active = native if native is not None else python
BACKEND = "cython" if _active is native else "python"

lstm_forward = _active.lstm_forward
lstm_backward = _active.lstm_backward
jacobi_eigh = _active.jacobi_eigh
attention_forward = _active.attention_forward
attention_backward = python.attention_backward


def tune_allocator() -> bool:
    """Keep large temporaries on the heap instead of fresh mmap pages.

    Training allocates and frees multi-megabyte arrays every step; with
    glibc's defaults each one is a new mapping and page faults dominate.
    No-op (returns False) off glibc.
    """
    import ctypes
    import ctypes.util

    try:
        libc = ctypes.CDLL(ctypes.util.find_library("c") or "libc.so.6")
        mallopt = libc.mallopt
    except (OSError, AttributeError):
        return False
    M_TRIM_THRESHOLD, M_TOP_PAD, M_MMAP_THRESHOLD = -1, -2, -3
    ok = mallopt(M_MMAP_THRESHOLD, 1 << 30) == 1
    ok &= mallopt(M_TRIM_THRESHOLD, 1 << 30) == 1
    ok &= mallopt(M_TOP_PAD, 256 << 20) == 1
    return bool(ok)
