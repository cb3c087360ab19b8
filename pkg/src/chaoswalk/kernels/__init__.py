"""Hot-loop kernels with a compiled core and a NumPy fallback.

The compiled extension is preferred when it imports cleanly; otherwise
the pure implementation is used.  ``BACKEND`` records which one won so
runs can report it.  Benchmarks and equivalence tests import the two
modules directly instead of relying on this selection.
"""

from . import _fallback

try:
    from . import _speedups as _impl

    BACKEND = "compiled"
except ImportError:
    _impl = _fallback
    BACKEND = "fallback"

evolve_sector_vectors = _impl.evolve_sector_vectors
harper_orbit = _impl.harper_orbit
harper_log_stretch = _impl.harper_log_stretch

__all__ = [
    "BACKEND",
    "evolve_sector_vectors",
    "harper_orbit",
    "harper_log_stretch",
]
