"""Backend selection for the composition scan kernel.

The compiled ``_ckernel`` is used when it was built; otherwise the numpy
fallback. Set ``CROWDCHARGE_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _pykernel

try:
    from . import _ckernel
except ImportError:  # extension not built
    _ckernel = None

BACKENDS = {"python": _pykernel.scan}
if _ckernel is not None:
    BACKENDS["cython"] = _ckernel.scan

if _ckernel is not None and not os.environ.get("CROWDCHARGE_PURE_PYTHON"):
    DEFAULT_BACKEND = "cython"
else:
    DEFAULT_BACKEND = "python"


def get_scan(backend=None):
    name = backend or DEFAULT_BACKEND
    try:
        return BACKENDS[name]
    except KeyError:
        raise ValueError(f"unknown or unavailable kernel backend {name!r}") from None
