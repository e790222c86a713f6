"""Kernel backend selection.

The compiled extension is used when it imports; otherwise the NumPy
kernels. ``DVLACCEL_BACKEND=python`` (or ``cython``) forces a choice.
"""

import os
from types import ModuleType

from . import _kernels_py

try:
    from . import _kernels_c
except ImportError:  # extension not built
    _kernels_c = None

BACKENDS = ("python", "cython")


def available() -> list[str]:
    return ["python"] + (["cython"] if _kernels_c is not None else [])


def get(name: str | None = None) -> ModuleType:
    if name is None:
        name = os.environ.get("DVLACCEL_BACKEND", "auto")
    if name == "auto":
        return _kernels_c if _kernels_c is not None else _kernels_py
    if name == "python":
        return _kernels_py
    if name == "cython":
        if _kernels_c is None:
            raise ImportError("the compiled kernel extension is not built; run `pip install -e .`")
        return _kernels_c
    raise ValueError(f"unknown backend {name!r}; expected one of {BACKENDS} or 'auto'")


kernels = get()
