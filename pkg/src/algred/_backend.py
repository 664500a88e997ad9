"""Backend selection: compiled kernels when available, numpy fallback otherwise.

The compiled extension implements the hot per-frame loops (tile walk, LLL,
detectors) in C; `algred._reference` implements the same semantics in pure
numpy.  Set ALGRED_BACKEND=python or ALGRED_BACKEND=compiled to force one
(the latter raises if the extension was not built).
"""

from __future__ import annotations

import os

from . import _reference

try:
    from . import _kernels
    HAVE_COMPILED = True
except ImportError:
    _kernels = None
    HAVE_COMPILED = False


def get_backend(name: str | None = None):
    name = name or os.environ.get("ALGRED_BACKEND", "")
    if name == "python":
        return _reference
    if name == "compiled":
        if not HAVE_COMPILED:
            raise RuntimeError("compiled backend requested but not built")
        return _kernels
    return _kernels if HAVE_COMPILED else _reference


def backend_name() -> str:
    return get_backend().BACKEND_NAME
