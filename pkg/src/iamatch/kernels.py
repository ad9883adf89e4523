"""Hot kernels, compiled when available.

The Cython extension ``_ckernels`` is used when it imports; otherwise (or
with ``IAMATCH_PURE_PYTHON=1``) the pure-Python reference ``_pykernels`` is
selected.  Both expose the same four functions and return identical results.
"""

import os
from types import ModuleType

from . import _pykernels


def _select() -> tuple[ModuleType, str]:
    if os.environ.get("IAMATCH_PURE_PYTHON", "") not in ("", "0"):
        return _pykernels, "python"
    try:
        from . import _ckernels
    except ImportError:
        return _pykernels, "python"
    return _ckernels, "cython"


_impl, BACKEND = _select()

enumerate_assignments = _impl.enumerate_assignments
find_dominating = _impl.find_dominating
hill_climb = _impl.hill_climb
pareto_flags = _impl.pareto_flags

OBJ_UTILITARIAN = _pykernels.OBJ_UTILITARIAN
OBJ_EGALITARIAN = _pykernels.OBJ_EGALITARIAN


def backend(name: str) -> ModuleType:
    """Return a specific back end (``"python"`` or ``"cython"``)."""
    if name == "python":
        return _pykernels
    if name == "cython":
        from . import _ckernels

        return _ckernels
    raise ValueError(f"unknown kernel backend {name!r}")
