"""Shared value types: phase-space points, chords, grids and sampled fields.

Axis convention is fixed throughout the package: a phase-space point is
``x = (p, q)`` and a chord is ``xi = (xi_p, xi_q)``.  The symplectic form
entering every Fourier kernel is

    x . J xi = q * xi_p - p * xi_q,     J = [[0, -1], [1, 0]].

Grids are endpoint inclusive: node ``i`` of an axis sits at
``min + i * (max - min) / (n - 1)`` and the last node is exactly ``max``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

WIGNER_AXES = ("p", "q")
CHORD_AXES = ("xi_p", "xi_q")


@dataclass(frozen=True)
class Constants:
    hbar: float = 1.0

    def __post_init__(self):
        if not (np.isfinite(self.hbar) and self.hbar > 0):
            raise ValueError(f"hbar must be positive and finite, got {self.hbar!r}")


DEFAULT_CONSTANTS = Constants()


@dataclass(frozen=True)
class PhasePoint:
    p: float
    q: float

    def __post_init__(self):
        if not (np.isfinite(self.p) and np.isfinite(self.q)):
            raise ValueError("phase-space point must have finite components")

    def as_array(self) -> np.ndarray:
        return np.array([self.p, self.q])


@dataclass(frozen=True)
class Chord:
    xi_p: float
    xi_q: float

    def __post_init__(self):
        if not (np.isfinite(self.xi_p) and np.isfinite(self.xi_q)):
            raise ValueError("chord must have finite components")

    def __neg__(self) -> "Chord":
        return Chord(-self.xi_p, -self.xi_q)

    @property
    def norm(self) -> float:
        return float(np.hypot(self.xi_p, self.xi_q))

    def as_array(self) -> np.ndarray:
        return np.array([self.xi_p, self.xi_q])


def symplectic_product(p, q, xi_p, xi_q):
    """``x . J xi`` for x = (p, q) and xi = (xi_p, xi_q); broadcasts."""
    return q * xi_p - p * xi_q


@dataclass(frozen=True)
class GridSpec:
    """Rectangular, endpoint-inclusive sampling grid.

    Axis ``a`` is the first array index, axis ``b`` the second.  For Wigner
    fields ``axis_labels == ("p", "q")``; for chord fields
    ``("xi_p", "xi_q")``.
    """

    min_a: float
    max_a: float
    n_a: int
    min_b: float
    max_b: float
    n_b: int
    axis_labels: tuple[str, str] = WIGNER_AXES

    def __post_init__(self):
        for lo, hi, n, name in ((self.min_a, self.max_a, self.n_a, "a"),
                                (self.min_b, self.max_b, self.n_b, "b")):
            if not (np.isfinite(lo) and np.isfinite(hi)) or not hi > lo:
                raise ValueError(f"axis {name}: need finite max > min, got [{lo}, {hi}]")
            if int(n) != n or n < 2:
                raise ValueError(f"axis {name}: need at least 2 samples, got {n}")
        object.__setattr__(self, "n_a", int(self.n_a))
        object.__setattr__(self, "n_b", int(self.n_b))
        object.__setattr__(self, "axis_labels", tuple(self.axis_labels))

    @classmethod
    def square(cls, lo: float, hi: float, n: int, axis_labels=WIGNER_AXES) -> "GridSpec":
        return cls(lo, hi, n, lo, hi, n, axis_labels)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n_a, self.n_b)

    @property
    def spacing_a(self) -> float:
        return (self.max_a - self.min_a) / (self.n_a - 1)

    @property
    def spacing_b(self) -> float:
        return (self.max_b - self.min_b) / (self.n_b - 1)

    def axis_a(self) -> np.ndarray:
        return _axis(self.min_a, self.max_a, self.n_a)

    def axis_b(self) -> np.ndarray:
        return _axis(self.min_b, self.max_b, self.n_b)

    def coordinate(self, i: int, j: int) -> tuple[float, float]:
        return (_node(self.min_a, self.max_a, self.n_a, i),
                _node(self.min_b, self.max_b, self.n_b, j))

    def index_of(self, a: float, b: float) -> tuple[int, int]:
        """Inverse of :meth:`coordinate` (nearest node)."""
        i = int(round((a - self.min_a) / self.spacing_a))
        j = int(round((b - self.min_b) / self.spacing_b))
        if not (0 <= i < self.n_a and 0 <= j < self.n_b):
            raise IndexError(f"({a}, {b}) lies outside the grid")
        return i, j

    def meshgrid(self) -> tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.axis_a(), self.axis_b(), indexing="ij")

    def to_dict(self) -> dict:
        return {"min_a": self.min_a, "max_a": self.max_a, "n_a": self.n_a,
                "min_b": self.min_b, "max_b": self.max_b, "n_b": self.n_b,
                "axis_labels": list(self.axis_labels)}


def _node(lo, hi, n, i):
    if i == n - 1:
        return float(hi)
    return lo + i * ((hi - lo) / (n - 1))


def _axis(lo, hi, n):
    out = lo + np.arange(n) * ((hi - lo) / (n - 1))
    out[-1] = hi
    return out


def grid_points(spec: GridSpec) -> Iterator[tuple[tuple[int, int], tuple[float, float]]]:
    """Enumerate ``((i, j), (a, b))`` in lexicographic index order."""
    a = spec.axis_a()
    b = spec.axis_b()
    for i in range(spec.n_a):
        for j in range(spec.n_b):
            yield (i, j), (float(a[i]), float(b[j]))


def trapezoid_weights(n: int, spacing: float) -> np.ndarray:
    w = np.full(n, spacing)
    w[0] = w[-1] = 0.5 * spacing
    return w


@dataclass
class ComplexField2D:
    """Complex samples on a :class:`GridSpec`; ``values[i, j]`` sits at node (i, j)."""

    spec: GridSpec
    values: np.ndarray
    kind: str = "chord"
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.shape != self.spec.shape:
            raise ValueError(f"values shape {self.values.shape} does not match grid {self.spec.shape}")

    @property
    def real(self) -> np.ndarray:
        return self.values.real

    @property
    def imag(self) -> np.ndarray:
        return self.values.imag

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.values)))

    def integral(self) -> complex:
        """Trapezoid-rule integral over the grid window."""
        wa = trapezoid_weights(self.spec.n_a, self.spec.spacing_a)
        wb = trapezoid_weights(self.spec.n_b, self.spec.spacing_b)
        return complex(wa @ self.values @ wb)

    def imag_ratio(self) -> float:
        """max |Im| / max |value|; ~0 for a legitimate Wigner field."""
        m = self.max_abs()
        return float(np.max(np.abs(self.values.imag)) / m) if m > 0 else 0.0

    def value_at(self, a: float, b: float) -> complex:
        i, j = self.spec.index_of(a, b)
        return complex(self.values[i, j])


@dataclass(frozen=True)
class CoherentParams:
    """Centre of a coherent state; the complex label is ``(alpha_q + i alpha_p) / sqrt(2 hbar)``."""

    alpha_q: float = 4.0
    alpha_p: float = 3.0

    def __post_init__(self):
        if not (np.isfinite(self.alpha_q) and np.isfinite(self.alpha_p)):
            raise ValueError("coherent-state centre must be finite")

    @property
    def center(self) -> PhasePoint:
        return PhasePoint(p=self.alpha_p, q=self.alpha_q)

    @property
    def radius(self) -> float:
        return float(np.hypot(self.alpha_p, self.alpha_q))

    def label(self, constants: Constants = DEFAULT_CONSTANTS) -> complex:
        return complex(self.alpha_q, self.alpha_p) / np.sqrt(2.0 * constants.hbar)

    def to_dict(self) -> dict:
        return {"alpha_q": self.alpha_q, "alpha_p": self.alpha_p}
