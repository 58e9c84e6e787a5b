"""Backend selection for the hot kernels.

The compiled ``_kernels`` extension is preferred. Set ``PARKGUARD_PURE_PYTHON=1``
to force the numpy implementation (used by the benchmark and the
cross-check tests).
"""

import logging
import os

from . import _kernels_py

logger = logging.getLogger(__name__)

_native = None
if os.environ.get("PARKGUARD_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _native
    except ImportError:  # extension not built
        logger.debug("compiled kernels unavailable; using numpy fallback")
        _native = None

BACKEND = "cython" if _native is not None else "python"

if _native is not None:
    godunov_hamiltonian_field = _native.godunov_hamiltonian_field
    _segment_distance = _native.segment_distance
else:
    godunov_hamiltonian_field = _kernels_py.godunov_hamiltonian_field
    _segment_distance = _kernels_py.segment_distance


def segment_distance(xs, ys, segs):
    """Distance from every grid node to the nearest segment; shape ``(ny, nx)``."""
    import numpy as np

    return _segment_distance(
        np.ascontiguousarray(xs, dtype=np.float64),
        np.ascontiguousarray(ys, dtype=np.float64),
        np.ascontiguousarray(np.asarray(segs, dtype=np.float64).reshape(-1, 4)),
    )
