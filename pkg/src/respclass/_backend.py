"""Pick the compiled SMO core when it is built, else the NumPy fallback.

Set ``RESPCLASS_PURE_PYTHON=1`` to force the fallback.
"""
import os

from . import _smo_py

try:
    if os.environ.get("RESPCLASS_PURE_PYTHON", "") not in ("", "0"):
        raise ImportError("pure-python backend requested")
    from . import _smo as _smo_ext
except ImportError:
    _smo_ext = None

BACKENDS = {"python": _smo_py}
if _smo_ext is not None:
    BACKENDS["cython"] = _smo_ext

BACKEND = "cython" if _smo_ext is not None else "python"
smo = BACKENDS[BACKEND]


def get(name=None):
    if name is None:
        return smo
    try:
        return BACKENDS[name]
    except KeyError:
        raise ValueError(f"SMO backend {name!r} not available; have {sorted(BACKENDS)}") from None
