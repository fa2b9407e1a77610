"""Routing kernel selection.

The compiled Cython kernel and the pure-Python kernel implement the same
algorithm with identical tie-breaking; the compiled one is used when it
imported cleanly and ``INKFAB_FORCE_PY_KERNEL`` is not set.
"""

import os

from . import _router_py

if os.environ.get("INKFAB_FORCE_PY_KERNEL"):
    kernel = _router_py
else:
    try:
        from . import _router_cy as kernel  # type: ignore[no-redef]
    except ImportError:
        kernel = _router_py

KERNEL_NAME = kernel.KERNEL_NAME


def available_kernels():
    out = {"python": _router_py}
    try:
        from . import _router_cy

        out["compiled"] = _router_cy
    except ImportError:
        pass
    return out
