"""Backend selection for the enumeration kernels.

The compiled extension is used when it imports; ``SXGRAPHS_PURE=1`` forces
the numpy fallback. ``BACKEND`` names the active one.
"""
import os

from . import _pykernels

if os.environ.get("SXGRAPHS_PURE"):
    _impl = _pykernels
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl
        BACKEND = "compiled"
    except ImportError:  # extension not built
        _impl = _pykernels
        BACKEND = "python"

nb_endpoint_counts = _impl.nb_endpoint_counts
nb_cycle_counts = _impl.nb_cycle_counts
bfs_distances = _impl.bfs_distances
bfs_summary = _impl.bfs_summary


def backend_module(name):
    """Return the kernel module for ``"compiled"`` or ``"python"``."""
    if name == "python":
        return _pykernels
    from . import _kernels
    return _kernels
