"""Backend selection for the hot loops.

The compiled ``_ckernels`` extension is used when it imports; otherwise the
NumPy fallback in ``_pykernels`` is used. Set ``PHYKEY_LAB_PURE_PYTHON=1`` to
force the fallback.
"""

import os

from . import _pykernels

BACKEND = "python"

if os.environ.get("PHYKEY_LAB_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as _impl
        BACKEND = "cython"
    except ImportError:  # extension not built
        _impl = _pykernels
else:
    _impl = _pykernels

tile_matmul = _impl.tile_matmul
psk_nearest = _impl.psk_nearest
rss_threshold = _impl.rss_threshold


def available_backends():
    """Return a dict of backend name -> kernel module for every importable backend."""
    found = {"python": _pykernels}
    try:
        from . import _ckernels
        found["cython"] = _ckernels
    except ImportError:
        pass
    return found
