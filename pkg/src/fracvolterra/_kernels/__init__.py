"""Backend selection for the hot O(n^2) kernels.

The numba backend is used unless ``FRACVOLTERRA_NUMBA=0`` is set in the
environment (read once, at import) or numba cannot be imported. Both
backends are importable as submodules so tests and benchmarks can compare
them directly.

``toeplitz_apply`` always comes from the numpy backend: it is a dense matrix
product that BLAS does faster than the compiled loop (see
``benchmarks/bench_kernels.py``).
"""

import os

from . import numpy_kernels

try:
    import numba  # noqa: F401
    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    _HAVE_NUMBA = False

USE_NUMBA = _HAVE_NUMBA and os.environ.get("FRACVOLTERRA_NUMBA", "1").strip() not in ("0", "false", "no")

if USE_NUMBA:
    from . import numba_kernels as active
    BACKEND = "numba"
else:
    active = numpy_kernels
    BACKEND = "numpy"

holder_sup = active.holder_sup
walpha1_integrals = active.walpha1_integrals
w1malpha2_sup = active.w1malpha2_sup
frac_left_mid = active.frac_left_mid
frac_right_mid = active.frac_right_mid
toeplitz_apply = numpy_kernels.toeplitz_apply

__all__ = [
    "BACKEND",
    "USE_NUMBA",
    "frac_left_mid",
    "frac_right_mid",
    "holder_sup",
    "toeplitz_apply",
    "w1malpha2_sup",
    "walpha1_integrals",
]
