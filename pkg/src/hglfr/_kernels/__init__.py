"""Hot loops for community detection.

The compiled extension ``_ckernels`` is used when it was built; otherwise,
or when ``HGLFR_PURE_PYTHON=1`` is set, the pure-Python versions in
``_pykernels`` are used. ``BACKEND`` names the active one.
"""

import os

from . import _pykernels

if os.environ.get("HGLFR_PURE_PYTHON", "") not in ("", "0"):
    _impl = _pykernels
else:
    try:
        from . import _ckernels as _impl
    except ImportError:  # extension not built
        _impl = _pykernels

BACKEND = "cython" if _impl is not _pykernels else "python"

local_moves = _impl.local_moves
lp_sweep = _impl.lp_sweep
lp_stable = _impl.lp_stable

__all__ = ["BACKEND", "local_moves", "lp_sweep", "lp_stable"]
