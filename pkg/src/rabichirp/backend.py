"""Kernel backend selection.

The integrator inner loops in ``_kernels.py`` are plain Python/numpy code
that can optionally be compiled with numba. Which path is used is decided
once, at import time, from the ``RABICHIRP_BACKEND`` environment variable:

* ``numba`` (default) -- compile the kernels with ``numba.njit``; falls
  back to pure numpy with a warning if numba is not importable.
* ``numpy`` -- run the kernels as ordinary Python (slow, dependency-free).

Both paths execute the same source, so results agree to floating-point
noise; ``bench/benchmark_backends.py`` times one against the other.
"""

import os
import warnings

_CHOICES = ("numba", "numpy")

BACKEND_ENV = "RABICHIRP_BACKEND"

_requested = os.environ.get(BACKEND_ENV, "numba").strip().lower()
if _requested not in _CHOICES:
    raise RuntimeError(
        f"{BACKEND_ENV}={_requested!r} is not recognised; choose from {_CHOICES}"
    )

USING_NUMBA = False
if _requested == "numba":
    try:
        from numba import njit as _njit

        USING_NUMBA = True
    except ImportError:  # pragma: no cover - exercised via env flag instead
        warnings.warn(
            "numba is not installed; falling back to the pure-numpy kernels "
            f"(set {BACKEND_ENV}=numpy to silence this warning)",
            stacklevel=2,
        )

if USING_NUMBA:
    def jit(func):
        """Compile a kernel for the active backend."""
        return _njit(cache=True, fastmath=False)(func)

    def jit_inline(func):
        """Compile a small helper and force-inline it into its callers."""
        return _njit(cache=True, fastmath=False, inline="always")(func)
else:
    def jit(func):
        """Identity decorator: run the kernel as plain Python."""
        return func

    jit_inline = jit


def backend_name() -> str:
    return "numba" if USING_NUMBA else "numpy"
