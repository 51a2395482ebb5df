"""Hot kernels.  The compiled extension is used when it was built; otherwise
the pure-Python implementation of the same algorithm is selected at import.
Set ``PARAXIAL_BANDS_PURE_PYTHON=1`` to force the fallback."""
import os

from . import _qr_py
from .errors import ConvergenceError

try:
    if os.environ.get("PARAXIAL_BANDS_PURE_PYTHON"):
        raise ImportError("pure-Python kernels requested")
    from . import _qr_c
except ImportError:
    _qr_c = None

KERNEL = "compiled" if _qr_c is not None else "python"
qr_eig = _qr_c.eig if _qr_c is not None else _qr_py.eig


def available() -> dict:
    """Name -> eig callable for every kernel importable in this process."""
    out = {"python": _qr_py.eig}
    if _qr_c is not None:
        out["compiled"] = _qr_c.eig
    return out


__all__ = ["ConvergenceError", "KERNEL", "qr_eig", "available"]
