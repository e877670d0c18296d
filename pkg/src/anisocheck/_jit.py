"""Kernel acceleration plumbing.

Hot inner loops live in ``_kernels`` in two variants: a numba ``@njit``
build and a pure-numpy build.  The numpy path is selected when numba is
not importable or when the environment variable ``ANISOCHECK_DISABLE_NUMBA``
is set to anything other than ``0`` or the empty string.  The flag is read
at call time so benchmarks can flip paths inside one process.

``ANISOCHECK_THREADS`` caps the numba threading layer (the kernels are
serial loops, so this only matters if numba decides to parallelize
library calls).
"""

import os

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only on bare installs
    numba = None
    HAVE_NUMBA = False


def numba_requested() -> bool:
    """True when the accelerated path should be used for kernel dispatch."""
    if not HAVE_NUMBA:
        return False
    flag = os.environ.get("ANISOCHECK_DISABLE_NUMBA", "0")
    return flag in ("", "0")


def apply_thread_cap():
    cap = os.environ.get("ANISOCHECK_THREADS")
    if cap and HAVE_NUMBA:
        try:
            numba.set_num_threads(max(1, int(cap)))
        except (ValueError, RuntimeError):
            pass


if HAVE_NUMBA:
    njit = numba.njit
else:  # pragma: no cover

    def njit(*args, **kwargs):
        # Decorator stub: kernels stay plain Python (never dispatched to,
        # but importable).
        if args and callable(args[0]):
            return args[0]

        def wrap(fn):
            return fn

        return wrap
