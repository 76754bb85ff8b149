"""Backend selection for the hot kernels.

The compiled Cython module is used when it imports; otherwise the numpy
reference implementation. Set ``BCLAB_BACKEND=python`` to force the fallback.
"""
import os

from . import _kernels_py

_NAMES = ("cos_product", "cos_product_dlambda", "signed_sums", "bit_signed_sums",
          "ppoly_eval", "ppoly_increment")

try:
    from . import _ckernels
except ImportError:  # not built
    _ckernels = None

_BACKENDS = {"python": _kernels_py}
if _ckernels is not None:
    _BACKENDS["cython"] = _ckernels

_active = None


def available_backends():
    return sorted(_BACKENDS)


def backend():
    return _active


def use_backend(name):
    """Switch every kernel to ``name`` ("cython" or "python")."""
    global _active
    if name not in _BACKENDS:
        raise ValueError(f"backend {name!r} not available; have {available_backends()}")
    mod = _BACKENDS[name]
    g = globals()
    for fn in _NAMES:
        g[fn] = getattr(mod, fn)
    _active = name


_requested = os.environ.get("BCLAB_BACKEND", "").strip().lower()
if _requested in _BACKENDS:
    use_backend(_requested)
else:
    use_backend("cython" if "cython" in _BACKENDS else "python")
