"""Select the compiled core when it is importable, else the numpy fallback.

Set ``REDCBC_BACKEND=python`` to force the fallback at import time, or use
:func:`use_backend` to switch temporarily (tests and benchmarks do this).
"""
import contextlib
import os

from . import _pycore

try:
    from . import _core as _compiled
except ImportError:  # extension not built
    _compiled = None

_KERNELS = ("order_sums", "thomas_spd", "omega_matvec_direct")


def available():
    return ("compiled", "python") if _compiled is not None else ("python",)


def _install(name):
    global BACKEND
    if name == "compiled":
        if _compiled is None:
            raise RuntimeError("compiled core is not built")
        src = _compiled
    elif name == "python":
        src = _pycore
    else:
        raise ValueError(f"unknown backend {name!r}")
    for k in _KERNELS:
        globals()[k] = getattr(src, k)
    BACKEND = name


@contextlib.contextmanager
def use_backend(name):
    prev = BACKEND
    _install(name)
    try:
        yield
    finally:
        _install(prev)


BACKEND = None
_install("python" if _compiled is None or os.environ.get("REDCBC_BACKEND") == "python" else "compiled")
