"""Exact quantum Kerr dynamics in a truncated Fock basis.

The number basis is that of ``H0 = p^2 + q^2`` with ``a = (q + i p) / sqrt(2 hbar)``,
so ``H0 = hbar (2 n + 1)`` and the Kerr Hamiltonian ``H0^2`` is diagonal with
eigenvalues ``hbar^2 (2 n + 1)^2``.  Position eigenfunctions are Hermite
functions of length scale ``sqrt(hbar)``.

Two independent routes give the chord function:

* pointwise: ``2 pi hbar chi(xi) = <psi| D(-beta) |psi>``, ``beta = (xi_q + i xi_p) / sqrt(2 hbar)``,
  with the displacement matrix elements from the associated-Laguerre closed form;
* on grids: the shifted product ``psi(y + xi_q/2) psi*(y - xi_q/2)`` Fourier
  transformed in ``y`` by a matrix DFT evaluated at the requested ``xi_p`` nodes.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

from . import kernels
from ._fourier import kernel as _ft_kernel, uniform_nodes
from .core import (CHORD_AXES, DEFAULT_CONSTANTS, WIGNER_AXES, Chord, CoherentParams,
                   ComplexField2D, Constants, GridSpec)

DEFAULT_TAIL_TOL = 1e-16
DEFAULT_MAX_FOCK = 1024
MIN_QUAD_POINTS = 2048
MAX_QUAD_POINTS = 1 << 16


class TruncationError(ValueError):
    """Requested accuracy needs more Fock states than the configured cap."""


class GridCoverageError(ValueError):
    """A quadrature grid does not cover the state's support or band."""


@dataclass(frozen=True)
class FockState:
    coeffs: np.ndarray
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex)
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def truncation(self) -> int:
        return self.coeffs.shape[0]

    def norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))

    def overlap(self, other: "FockState") -> complex:
        """``<self|other>`` (zero-padding the shorter vector)."""
        n = max(self.truncation, other.truncation)
        a = np.zeros(n, complex)
        b = np.zeros(n, complex)
        a[:self.truncation] = self.coeffs
        b[:other.truncation] = other.coeffs
        return complex(np.vdot(a, b))

    def mean_number(self) -> float:
        n = np.arange(self.truncation)
        return float(np.sum(n * np.abs(self.coeffs) ** 2))

    def support_radius(self, constants: Constants = DEFAULT_CONSTANTS) -> float:
        """Phase-space radius containing the state: top Fock turning point plus 6 sqrt(hbar)."""
        h = constants.hbar
        return float(np.sqrt(2.0 * h * (2 * self.truncation + 1)) + 6.0 * np.sqrt(h))


def coherent_fock(params: CoherentParams, constants: Constants = DEFAULT_CONSTANTS,
                  tail_tol: float = DEFAULT_TAIL_TOL, max_n: int = DEFAULT_MAX_FOCK) -> FockState:
    """Fock expansion ``c_n = exp(-|alpha|^2/2) alpha^n / sqrt(n!)`` truncated by tail mass.

    The truncation ``N`` is the smallest one with ``sum_{n>=N} |c_n|^2 < tail_tol``;
    the kept coefficients are renormalised.
    """
    if not 0.0 < tail_tol < 1.0:
        raise ValueError("tail_tol must lie in (0, 1)")
    alpha = params.label(constants)
    mod2 = abs(alpha) ** 2
    if mod2 == 0.0:
        return FockState(np.ones(1, complex), meta={"tail_mass": 0.0})
    # Poisson weights far enough out that the remaining tail is negligible
    horizon = int(max(max_n, mod2 + 40.0 * np.sqrt(mod2) + 100)) + 1
    n = np.arange(horizon)
    logw = n * np.log(mod2) - mod2 - gammaln(n + 1)
    w = np.exp(logw)
    tail = np.cumsum(w[::-1])[::-1]
    below = np.nonzero(tail < tail_tol)[0]
    big_n = int(below[0]) if below.size else horizon
    big_n = max(big_n, 1)
    if big_n > max_n:
        raise TruncationError(f"tail mass {tail_tol:g} needs N={big_n} Fock states (cap {max_n})")
    k = np.arange(big_n)
    mag = np.exp(0.5 * logw[:big_n])
    coeffs = mag * np.exp(1j * k * np.angle(alpha))
    coeffs /= np.linalg.norm(coeffs)
    tail_mass = float(tail[big_n]) if big_n < horizon else 0.0
    return FockState(coeffs, meta={"tail_mass": tail_mass, "alpha": [alpha.real, alpha.imag]})


def kerr_phases(truncation: int, t: float, constants: Constants = DEFAULT_CONSTANTS) -> np.ndarray:
    """``exp(-i t E_n / hbar)`` with ``E_n = hbar^2 (2n+1)^2``."""
    odd2 = (2.0 * np.arange(truncation) + 1.0) ** 2
    return np.exp(-1j * (t * constants.hbar) * odd2)


def kerr_propagate(state: FockState, t: float, constants: Constants = DEFAULT_CONSTANTS) -> FockState:
    out = state.coeffs * kerr_phases(state.truncation, t, constants)
    return FockState(out, meta=dict(state.meta, t=float(t) + state.meta.get("t", 0.0)))


def revival_time(constants: Constants = DEFAULT_CONSTANTS) -> float:
    return np.pi / (4.0 * constants.hbar)


def wavefunction(state: FockState, q, constants: Constants = DEFAULT_CONSTANTS) -> np.ndarray:
    """``psi(q) = sum_n c_n phi_n(q)`` via the Hermite-function recurrence."""
    h = constants.hbar
    q = np.asarray(q, dtype=float)
    return h ** -0.25 * kernels.hermite_series(state.coeffs, q / np.sqrt(h))


def _chord_gamma(xi_p, xi_q, hbar):
    # 2 pi hbar chi(xi) = <psi| D(gamma) |psi> with gamma = -(xi_q + i xi_p) / sqrt(2 hbar)
    return -(np.asarray(xi_q, float) + 1j * np.asarray(xi_p, float)) / np.sqrt(2.0 * hbar)


def chord_values(state: FockState, xi_p, xi_q, constants: Constants = DEFAULT_CONSTANTS) -> np.ndarray:
    """Pointwise chord function at broadcast arrays ``xi_p``, ``xi_q`` (Laguerre route)."""
    h = constants.hbar
    xi_p, xi_q = np.broadcast_arrays(np.asarray(xi_p, float), np.asarray(xi_q, float))
    gamma = _chord_gamma(xi_p, xi_q, h)
    return kernels.displacement_expectation(state.coeffs, gamma) / (2.0 * np.pi * h)


def chord_exact(state: FockState, xi: Chord, constants: Constants = DEFAULT_CONSTANTS) -> complex:
    return complex(chord_values(state, xi.xi_p, xi.xi_q, constants))


def loschmidt(initial: FockState, xi: Chord, t: float, constants: Constants = DEFAULT_CONSTANTS) -> complex:
    """Echo ``<alpha| U_{-t} T_xi U_t |alpha> = 2 pi hbar chi_t(-xi)``."""
    evolved = kerr_propagate(initial, t, constants)
    return 2.0 * np.pi * constants.hbar * chord_exact(evolved, -xi, constants)


def _quad_points(extent, band, hbar, n_min):
    # trapezoid on a band-limited integrand is alias free while 2 pi hbar / dy > band
    dy_max = np.pi * hbar / band
    n = max(n_min, int(np.ceil(2.0 * extent / dy_max)) + 1)
    if n > MAX_QUAD_POINTS:
        raise GridCoverageError(f"quadrature would need {n} points (cap {MAX_QUAD_POINTS})")
    return n


def _check_extent(state, constants, quad_extent):
    need = state.support_radius(constants)
    if quad_extent is None:
        return need
    if quad_extent < need:
        raise GridCoverageError(
            f"quadrature half-width {quad_extent:g} does not cover the state's support {need:g}")
    return float(quad_extent)


def chord_outer(state: FockState, xi_p, xi_q, constants: Constants = DEFAULT_CONSTANTS,
                quad_extent: float | None = None, n_quad: int | None = None) -> np.ndarray:
    """Grid-route chord values on the outer product ``xi_p x xi_q`` -> shape (len(xi_p), len(xi_q)).

    Nodes may be arbitrary; the xi_p transform is an explicit matrix DFT.
    """
    h = constants.hbar
    xi_p = np.atleast_1d(np.asarray(xi_p, float))
    xi_q = np.atleast_1d(np.asarray(xi_q, float))
    extent = _check_extent(state, constants, quad_extent)
    band = np.max(np.abs(xi_p)) + 2.0 * extent
    m = n_quad or _quad_points(extent, band, h, MIN_QUAD_POINTS)
    y, w = uniform_nodes(extent, m)
    plus = wavefunction(state, y[None, :] + 0.5 * xi_q[:, None], constants)
    minus = wavefunction(state, y[None, :] - 0.5 * xi_q[:, None], constants)
    rows = plus * np.conj(minus)
    out = rows @ _ft_kernel(y, w, xi_p, -1.0, h)
    return out.T / (2.0 * np.pi * h)


def chord_grid_exact(state: FockState, spec: GridSpec, constants: Constants = DEFAULT_CONSTANTS,
                     **quad) -> ComplexField2D:
    _require_axes(spec, CHORD_AXES)
    values = chord_outer(state, spec.axis_a(), spec.axis_b(), constants, **quad)
    return ComplexField2D(spec, values, kind="chord",
                          meta={"route": "grid-fourier", "fock_n": state.truncation,
                                "hbar": constants.hbar})


def wigner_outer(state: FockState, p, q, constants: Constants = DEFAULT_CONSTANTS,
                 quad_extent: float | None = None, n_quad: int | None = None) -> np.ndarray:
    """``W(p, q) = (1/2 pi hbar) int dy psi*(q + y/2) psi(q - y/2) exp(i p y / hbar)``."""
    h = constants.hbar
    p = np.atleast_1d(np.asarray(p, float))
    q = np.atleast_1d(np.asarray(q, float))
    extent = _check_extent(state, constants, quad_extent)
    band = np.max(np.abs(p)) + extent
    m = n_quad or _quad_points(2.0 * extent, band, h, MIN_QUAD_POINTS)
    y, w = uniform_nodes(2.0 * extent, m)
    right = wavefunction(state, q[:, None] - 0.5 * y[None, :], constants)
    left = wavefunction(state, q[:, None] + 0.5 * y[None, :], constants)
    rows = np.conj(left) * right
    out = rows @ _ft_kernel(y, w, p, +1.0, h)
    return out.T / (2.0 * np.pi * h)


def wigner_grid_exact(state: FockState, spec: GridSpec, constants: Constants = DEFAULT_CONSTANTS,
                      **quad) -> ComplexField2D:
    _require_axes(spec, WIGNER_AXES)
    values = wigner_outer(state, spec.axis_a(), spec.axis_b(), constants, **quad)
    return ComplexField2D(spec, values, kind="wigner",
                          meta={"route": "grid-fourier", "fock_n": state.truncation,
                                "hbar": constants.hbar})


def _require_axes(spec, labels):
    if tuple(spec.axis_labels) != tuple(labels):
        raise ValueError(f"grid axes must be {labels}, got {spec.axis_labels}")


class ExactChord:
    """Pointwise exact chord evaluator for one state: ``ev(xi_p, xi_q)`` broadcasts."""

    def __init__(self, state: FockState, constants: Constants = DEFAULT_CONSTANTS):
        self.state = state
        self.constants = constants

    @property
    def position_extent(self) -> float:
        """Half-width in q beyond which the wavefunction is negligible."""
        return self.state.support_radius(self.constants)

    def __call__(self, xi_p, xi_q):
        return chord_values(self.state, xi_p, xi_q, self.constants)

    def grid(self, xi_p, xi_q):
        pp, qq = np.meshgrid(np.asarray(xi_p, float), np.asarray(xi_q, float), indexing="ij")
        return self(pp, qq)


def evolved_coherent(params: CoherentParams, t: float, constants: Constants = DEFAULT_CONSTANTS,
                     tail_tol: float = DEFAULT_TAIL_TOL) -> FockState:
    return kerr_propagate(coherent_fock(params, constants, tail_tol), t, constants)
