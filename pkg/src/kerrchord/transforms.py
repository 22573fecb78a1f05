"""Symplectic Fourier transform between Wigner and chord fields, and the TCA.

    chi(xi) = (1 / 2 pi hbar) int dx exp(-i x.J xi / hbar) W(x)
    W(x)    = (1 / 2 pi hbar) int dxi exp(+i x.J xi / hbar) chi(xi)

with ``x.J xi = q xi_p - p xi_q``.  With this normalisation the pair is
unitary, so ``int |W|^2 dx = int |chi|^2 dxi``.  Both directions are separable
matrix transforms with kernels built from absolute coordinates: the outputs
are trapezoid-rule samples of the continuous integrals at the requested
nodes, whatever the offsets of either grid.
"""
from __future__ import annotations

import math
import warnings

import numpy as np
from scipy.stats import ncx2

from ._fourier import kernel, real_left_matmul
from .classical import ehrenfest_time, min_winding_chord, twa_values
from .core import (CHORD_AXES, DEFAULT_CONSTANTS, WIGNER_AXES, CoherentParams, ComplexField2D,
                   Constants, GridSpec, trapezoid_weights)

BOUNDARY_MASS_TOL = 1e-8
MIN_SOURCE_POINTS = 1024
MAX_SOURCE_POINTS = 4096
SAMPLES_PER_FILAMENT = 8


class BandLimitError(ValueError):
    """Requested output frequencies alias on the input grid."""


class BoundaryMassError(ValueError):
    """Source window cuts off more probability than the diagnostic allows."""


class UnderResolvedWarning(UserWarning):
    pass


def _require(field_or_spec, labels, what):
    spec = getattr(field_or_spec, "spec", field_or_spec)
    if tuple(spec.axis_labels) != labels:
        raise ValueError(f"{what} needs axes {labels}, got {spec.axis_labels}")


def _check_band(freqs, spacing, hbar, name):
    limit = np.pi * hbar / spacing
    top = float(np.max(np.abs(freqs)))
    if top > limit:
        raise BandLimitError(f"|{name}| up to {top:g} exceeds the Nyquist limit {limit:g} "
                             "of the input spacing")


def _weights(spec):
    return (trapezoid_weights(spec.n_a, spec.spacing_a),
            trapezoid_weights(spec.n_b, spec.spacing_b))


def sft_outer(values, spec: GridSpec, xi_p, xi_q, constants: Constants = DEFAULT_CONSTANTS,
              check_band: bool = True) -> np.ndarray:
    """SFT of samples on a (p, q) grid, evaluated on the outer product ``xi_p x xi_q``."""
    h = constants.hbar
    xi_p = np.atleast_1d(np.asarray(xi_p, float))
    xi_q = np.atleast_1d(np.asarray(xi_q, float))
    if check_band:
        _check_band(xi_p, spec.spacing_b, h, "xi_p")
        _check_band(xi_q, spec.spacing_a, h, "xi_q")
    wp, wq = _weights(spec)
    kp = kernel(spec.axis_a(), wp, xi_q, +1.0, h)          # (n_p, n_xq)
    kq = kernel(spec.axis_b(), wq, xi_p, -1.0, h)          # (n_q, n_xp)
    values = np.asarray(values)
    if np.isrealobj(values):
        inner = real_left_matmul(kq.T, values.T)           # (n_xp, n_p)
    else:
        inner = kq.T @ values.T
    return (inner @ kp) / (2.0 * np.pi * h)


def sft(field: ComplexField2D, out_spec: GridSpec, constants: Constants = DEFAULT_CONSTANTS) -> ComplexField2D:
    """Wigner-type field on (p, q) -> chord-type field on (xi_p, xi_q)."""
    _require(field, WIGNER_AXES, "sft input")
    _require(out_spec, CHORD_AXES, "sft output")
    src = field.values.real if not np.any(field.values.imag) else field.values
    values = sft_outer(src, field.spec, out_spec.axis_a(), out_spec.axis_b(), constants)
    meta = dict(field.meta)
    meta.update({"transform": "sft", "source_grid": field.spec.to_dict()})
    return ComplexField2D(out_spec, values, kind="chord", meta=meta)


def isft(field: ComplexField2D, out_spec: GridSpec, constants: Constants = DEFAULT_CONSTANTS) -> ComplexField2D:
    """Chord-type field on (xi_p, xi_q) -> Wigner-type field on (p, q)."""
    _require(field, CHORD_AXES, "isft input")
    _require(out_spec, WIGNER_AXES, "isft output")
    h = constants.hbar
    p = out_spec.axis_a()
    q = out_spec.axis_b()
    _check_band(q, field.spec.spacing_a, h, "q")
    _check_band(p, field.spec.spacing_b, h, "p")
    w_xp, w_xq = _weights(field.spec)
    k_xp = kernel(field.spec.axis_a(), w_xp, q, +1.0, h)   # (n_xp, n_q)
    k_xq = kernel(field.spec.axis_b(), w_xq, p, -1.0, h)   # (n_xq, n_p)
    values = (k_xq.T @ field.values.T @ k_xp) / (2.0 * np.pi * h)
    meta = dict(field.meta)
    meta.update({"transform": "isft", "source_grid": field.spec.to_dict()})
    return ComplexField2D(out_spec, values, kind="wigner", meta=meta)


def outside_mass(params: CoherentParams, radius: float, constants: Constants = DEFAULT_CONSTANTS) -> float:
    """Mass of the initial Gaussian beyond ``radius`` from the origin.

    The Kerr flow conserves ``p^2 + q^2``, so this is also the mass outside
    that disc at every later time.  ``(r / sigma)^2`` is noncentral chi-square
    with 2 degrees of freedom.
    """
    s2 = constants.hbar / 2.0
    return float(ncx2.sf(radius ** 2 / s2, 2, params.radius ** 2 / s2))


def source_resolution(params: CoherentParams, t: float, half_width: float,
                      constants: Constants = DEFAULT_CONSTANTS) -> int:
    """Samples per axis for ``SAMPLES_PER_FILAMENT`` points across the sheared filament.

    The packet's full width ``4 sigma`` is thinned by the local stretching
    factor ``max(1, 8 t X r)``, taken at ``r = X + 3 sigma``.
    """
    sigma = math.sqrt(constants.hbar / 2.0)
    x_c = params.radius
    stretch = max(1.0, 8.0 * abs(t) * x_c * (x_c + 3.0 * sigma))
    dx = 4.0 * sigma / stretch / SAMPLES_PER_FILAMENT
    return int(math.ceil(2.0 * half_width / dx)) + 1


def tca_source_spec(params: CoherentParams, t: float, constants: Constants = DEFAULT_CONSTANTS,
                    n: int | None = None, half_width: float | None = None):
    """Square (p, q) window for the TWA field feeding the TCA.

    Returns ``(spec, diagnostics)``.  Raises :class:`BoundaryMassError` when
    the window drops more than ``BOUNDARY_MASS_TOL`` of the distribution and
    warns with :class:`UnderResolvedWarning` when ``n`` is below the
    filament requirement.
    """
    if half_width is None:
        half_width = params.radius + 6.0 * math.sqrt(constants.hbar)
    mass = outside_mass(params, half_width, constants)
    if mass > BOUNDARY_MASS_TOL:
        raise BoundaryMassError(f"window half-width {half_width:g} leaves mass {mass:.3g} outside "
                                f"(limit {BOUNDARY_MASS_TOL:g})")
    need = source_resolution(params, t, half_width, constants)
    if n is None:
        n = max(MIN_SOURCE_POINTS, need)
        if n > MAX_SOURCE_POINTS:
            n = MAX_SOURCE_POINTS
    resolved = n >= need
    if not resolved:
        warnings.warn(f"TWA source grid {n} per axis is below the {need} needed to resolve the "
                      f"filament at t={t:g}", UnderResolvedWarning, stacklevel=3)
    spec = GridSpec.square(-half_width, half_width, int(n), WIGNER_AXES)
    return spec, {"boundary_mass": mass, "needed_points": need, "resolved": resolved}


def _tca_meta(params, t, spec, diag, constants):
    te = ehrenfest_time(params)
    return {"route": "tca", "t": float(t), "hbar": constants.hbar,
            "source_grid": spec.to_dict(), "boundary_mass": diag["boundary_mass"],
            "source_resolved": diag["resolved"], "ehrenfest_time": te,
            "validity_radius": min_winding_chord(params, t) if t > te else None}


def tca_grid(params: CoherentParams, t: float, chord_spec: GridSpec,
             constants: Constants = DEFAULT_CONSTANTS, source_n: int | None = None,
             source_half_width: float | None = None) -> ComplexField2D:
    """SFT of the TWA field, sampled on ``chord_spec``."""
    if t < 0:
        raise ValueError("tca_grid needs t >= 0")
    _require(chord_spec, CHORD_AXES, "tca_grid output")
    src, diag = tca_source_spec(params, t, constants, source_n, source_half_width)
    pp, qq = src.meshgrid()
    w = twa_values(params, pp, qq, t, constants)
    values = sft_outer(w, src, chord_spec.axis_a(), chord_spec.axis_b(), constants)
    return ComplexField2D(chord_spec, values, kind="chord",
                          meta=_tca_meta(params, t, src, diag, constants))


class TCAChord:
    """Pointwise TCA evaluator: the TWA field is sampled once, then transformed on demand.

    ``__call__`` broadcasts over scattered chords; ``grid`` returns the outer
    product ``xi_p x xi_q`` in one matrix transform.
    """

    def __init__(self, params: CoherentParams, t: float, constants: Constants = DEFAULT_CONSTANTS,
                 source_n: int | None = None, source_half_width: float | None = None):
        self.params = params
        self.t = float(t)
        self.constants = constants
        self.source_spec, diag = tca_source_spec(params, t, constants, source_n, source_half_width)
        pp, qq = self.source_spec.meshgrid()
        wp, wq = _weights(self.source_spec)
        self._weighted = twa_values(params, pp, qq, t, constants) * np.outer(wp, wq)
        self.meta = _tca_meta(params, t, self.source_spec, diag, constants)

    @property
    def position_extent(self) -> float:
        return float(self.source_spec.max_b)

    def __call__(self, xi_p, xi_q, chunk: int = 64):
        h = self.constants.hbar
        xp, xq = np.broadcast_arrays(np.asarray(xi_p, float), np.asarray(xi_q, float))
        flat_p = xp.ravel()
        flat_q = xq.ravel()
        p = self.source_spec.axis_a()
        q = self.source_spec.axis_b()
        out = np.empty(flat_p.size, dtype=complex)
        for s in range(0, flat_p.size, chunk):
            ep = np.exp(1j / h * np.multiply.outer(p, flat_q[s:s + chunk]))     # (n_p, m)
            eq = np.exp(-1j / h * np.multiply.outer(q, flat_p[s:s + chunk]))    # (n_q, m)
            inner = self._weighted.T @ ep.real + 1j * (self._weighted.T @ ep.imag)
            out[s:s + chunk] = np.sum(inner * eq, axis=0)
        return (out / (2.0 * np.pi * h)).reshape(xp.shape)

    def grid(self, xi_p, xi_q):
        """Values on the outer product, shape ``(len(xi_p), len(xi_q))``."""
        h = self.constants.hbar
        xi_p = np.atleast_1d(np.asarray(xi_p, float))
        xi_q = np.atleast_1d(np.asarray(xi_q, float))
        kp = np.exp(1j / h * np.multiply.outer(self.source_spec.axis_a(), xi_q))
        kq = np.exp(-1j / h * np.multiply.outer(self.source_spec.axis_b(), xi_p))
        inner = real_left_matmul(kq.T, self._weighted.T)
        return (inner @ kp) / (2.0 * np.pi * h)

    def field(self, chord_spec: GridSpec) -> ComplexField2D:
        _require(chord_spec, CHORD_AXES, "TCA field")
        return ComplexField2D(chord_spec, self.grid(chord_spec.axis_a(), chord_spec.axis_b()),
                              kind="chord", meta=dict(self.meta))
