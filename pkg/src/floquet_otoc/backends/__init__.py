"""Kernel backend selection.

Two interchangeable kernel modules exist: a numba-jitted one and a pure-numpy
fallback. Selection order:

1. explicit ``name`` argument,
2. the ``FLOQUET_OTOC_BACKEND`` environment variable (``auto`` | ``numba`` |
   ``numpy``),
3. ``auto``: numba when importable, numpy otherwise.

Both modules export the same functions over split re/im float64 arrays:
``scale_two_sided``, ``scale_rows``, ``rotate_cols``, ``rotate_rows_batch``,
``mul_xflip_sum``, ``mul_zdiag``, ``trace_prod_sym``, ``sum_sq``,
``max_colnorm_dev``.
"""

from __future__ import annotations

import os
from types import ModuleType

ENV_FLAG = "FLOQUET_OTOC_BACKEND"
_CHOICES = ("auto", "numba", "numpy")


def has_numba() -> bool:
    try:
        import numba  # noqa: F401
    except ImportError:
        return False
    return True


def backend_name(name: str | None = None) -> str:
    """Resolve the effective backend name ('numba' or 'numpy')."""
    choice = name or os.environ.get(ENV_FLAG, "auto")
    if choice not in _CHOICES:
        raise ValueError(
            f"unknown backend {choice!r}; expected one of {', '.join(_CHOICES)}"
        )
    if choice == "auto":
        return "numba" if has_numba() else "numpy"
    if choice == "numba" and not has_numba():
        raise RuntimeError("numba backend requested but numba is not importable")
    return choice


def get_backend(name: str | None = None) -> ModuleType:
    """Return the kernel module for ``name`` (or the environment default)."""
    resolved = backend_name(name)
    if resolved == "numba":
        from . import numba_kernels

        return numba_kernels
    from . import numpy_kernels

    return numpy_kernels
