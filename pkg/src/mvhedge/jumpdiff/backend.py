"""Kernel selection: compiled extension if built, numpy otherwise.

Both kernels implement the generator documented in _rng.py and agree to
within a few ulp (see the benchmark and tests); each one on its own is
bit-reproducible for a fixed seed.
"""

from __future__ import annotations

from . import _kernel_py

try:
    from . import _kernel as _compiled
except ImportError:
    _compiled = None

HAVE_COMPILED = _compiled is not None
DEFAULT_BACKEND = "compiled" if HAVE_COMPILED else "python"


def available_backends() -> tuple[str, ...]:
    return ("compiled", "python") if HAVE_COMPILED else ("python",)


def get_kernel(backend: str = "auto"):
    """Resolve a backend name to the module exposing the kernel entry
    points ``pure_paths`` and ``price_paths``."""
    if backend == "auto":
        backend = DEFAULT_BACKEND
    if backend in ("python", "py"):
        return _kernel_py
    if backend in ("compiled", "cy"):
        if not HAVE_COMPILED:
            raise RuntimeError("compiled kernel requested but the extension "
                               "is not built; reinstall with a C compiler")
        return _compiled
    raise ValueError(f"unknown backend {backend!r}; expected 'auto', "
                     "'compiled' or 'python'")
