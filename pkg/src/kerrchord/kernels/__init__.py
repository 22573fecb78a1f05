"""Hot numeric kernels with a numba path and a pure-numpy fallback.

The backend is picked once at import time.  Set ``KERRCHORD_DISABLE_NUMBA=1``
(or leave numba uninstalled) to run everything through the numpy versions.
Both modules expose identical functions:

``hermite_basis(n, x)``
    Normalised Hermite functions ``psi_0..psi_{n-1}`` at ``x`` (unit scale),
    shape ``(n,) + x.shape``.
``hermite_series(coeffs, x)``
    ``sum_k coeffs[k] * psi_k(x)`` without materialising the basis.
``displacement_expectation(coeffs, gamma)``
    ``<psi| D(gamma) |psi>`` in the truncated Fock basis, from the
    associated-Laguerre closed form of the matrix elements.
``marching_segments(values)``
    Zero-level contour segments of a real 2D array in fractional index
    coordinates, with their cell and global edge ids.
``segment_intersections(seg_a, cell_a, seg_b, cell_b, shape)``
    Pairwise crossings between two segment families, searched over the
    3x3 neighbourhood of each cell.
"""
import os

from . import _numpy

_FUNCS = ("hermite_basis", "hermite_series", "displacement_expectation",
          "marching_segments", "segment_intersections")


def _env_disabled() -> bool:
    return os.environ.get("KERRCHORD_DISABLE_NUMBA", "").strip().lower() in ("1", "true", "yes", "on")


try:
    if _env_disabled():
        raise ImportError("numba disabled by KERRCHORD_DISABLE_NUMBA")
    from . import _numba
    NUMBA_AVAILABLE = True
except ImportError:
    _numba = None
    NUMBA_AVAILABLE = False

BACKEND = "numba" if NUMBA_AVAILABLE else "numpy"


def backend_module(name: str | None = None):
    """Return the kernel module for ``name`` ('numba' or 'numpy'); default is the active one."""
    name = name or BACKEND
    if name == "numba":
        if _numba is None:
            raise RuntimeError("numba backend unavailable")
        return _numba
    if name == "numpy":
        return _numpy
    raise ValueError(f"unknown backend {name!r}")


_active = backend_module()
hermite_basis = _active.hermite_basis
hermite_series = _active.hermite_series
displacement_expectation = _active.displacement_expectation
marching_segments = _active.marching_segments
segment_intersections = _active.segment_intersections

__all__ = list(_FUNCS) + ["BACKEND", "NUMBA_AVAILABLE", "backend_module"]
