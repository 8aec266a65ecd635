"""Backend selection for the hot kernels.

The compiled extension ``_ckernels`` is used when it imports; otherwise the
numpy implementation in ``_pykernels`` is used. Set ``NVSCATTER_PURE_PYTHON=1``
to force the fallback.
"""

import os

import numpy as np

from . import _pykernels

if os.environ.get("NVSCATTER_PURE_PYTHON"):
    _impl = _pykernels
else:
    try:
        from . import _ckernels as _impl
    except ImportError:  # extension not built
        _impl = _pykernels

BACKEND = "cython" if _impl is not _pykernels else "python"


def hankel1_0(z):
    """Order-zero Hankel function of the first kind for real positive arguments."""
    return _impl.hankel1_0(np.asarray(z, dtype=float))


def assemble_system(table, i1, i2, weights, offset):
    return _impl.assemble_system(
        np.ascontiguousarray(table, dtype=complex),
        np.ascontiguousarray(i1, dtype=np.intp),
        np.ascontiguousarray(i2, dtype=np.intp),
        np.ascontiguousarray(weights, dtype=complex),
        int(offset),
    )
