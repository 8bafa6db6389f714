"""Pick the polynomial kernel implementation at import time.

The compiled extension is used when it was built; set ``FIELDCALC_PURE=1``
to force the pure-Python kernels.
"""
import os

from . import _kernels_py

BITS = _kernels_py.BITS
MASK = _kernels_py.MASK

_impl = _kernels_py
if os.environ.get("FIELDCALC_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _compiled  # type: ignore[attr-defined]
    except ImportError:
        _compiled = None
    else:
        _impl = _compiled
else:
    _compiled = None

NAME = "compiled" if _impl is not _kernels_py else "python"

pmul = _impl.pmul
padd = _impl.padd
pscale_mono = _impl.pscale_mono
preduce = _impl.preduce
pdiv_exact = _impl.pdiv_exact


def available() -> dict:
    """Map backend name -> module for every importable implementation."""
    out = {"python": _kernels_py}
    if _compiled is not None:
        out["compiled"] = _compiled
    else:
        try:
            from . import _kernels as mod  # type: ignore[attr-defined]

            out["compiled"] = mod
        except ImportError:
            pass
    return out
