"""Hot-loop kernel backends.

Two interchangeable implementations exist: a numba-jitted one and a pure
numpy fallback.  The default is numba when importable; set the environment
variable ``TCT_BACKEND=numpy`` (or ``numba``) to force a choice.  Both
expose ``f_grid`` and ``backproject_points`` with identical semantics.
"""

from __future__ import annotations

import os

from . import numpy_backend

_cached = None


def get_backend(name: str | None = None):
    """Return the kernel module for `name`, or the environment default."""
    global _cached
    if name is None:
        name = os.environ.get("TCT_BACKEND", "").strip().lower()
    if name == "numpy":
        return numpy_backend
    if name == "numba":
        from . import numba_backend

        return numba_backend
    if name:
        raise ValueError(f"unknown kernel backend {name!r}; use 'numba' or 'numpy'")
    if _cached is None:
        try:
            from . import numba_backend as _nb

            _cached = _nb
        except ImportError:
            _cached = numpy_backend
    return _cached
