"""Numerical kernel backends.

The hot training loops (MLP forward/backward, Adam updates) exist twice:
a compiled Cython extension (``_kernels``) and a pure-NumPy reference
(``python``). The compiled one is preferred when importable; set
``DEBIASKIT_BACKEND=python`` or ``=cython`` to force a choice.
"""

import os

from . import python as _python_backend


def _load_default():
    forced = os.environ.get("DEBIASKIT_BACKEND", "auto")
    if forced not in ("auto", "cython", "python"):
        raise ValueError(f"unknown DEBIASKIT_BACKEND value: {forced!r}")
    if forced in ("auto", "cython"):
        try:
            from . import _kernels

            return _kernels
        except ImportError:
            if forced == "cython":
                raise
    return _python_backend


_active = _load_default()


def active():
    """Return the kernel module currently in use."""
    return _active


def backend_name() -> str:
    return _active.NAME


def use(name: str):
    """Switch backends at runtime ('python' or 'cython'). Returns the module."""
    global _active
    if name == "python":
        _active = _python_backend
    elif name == "cython":
        from . import _kernels

        _active = _kernels
    else:
        raise ValueError(f"unknown backend: {name!r}")
    return _active
