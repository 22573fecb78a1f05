"""Moments and local wave-function correlations.

Moments come from two routes: ladder-operator algebra on the Fock vector
(exact within truncation), and derivatives of the chord function at the
origin,

    <q^n> = 2 pi hbar (i hbar)^n  d^n chi / d xi_p^n  at xi = 0,
    <p^n> = 2 pi hbar (-i hbar)^n d^n chi / d xi_q^n  at xi = 0,

which also applies to the TCA, giving its classical estimate.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .classical import classical_moment, classical_moments, ehrenfest_time
from .core import DEFAULT_CONSTANTS, CoherentParams, Constants
from .quantum import FockState, TruncationError, coherent_fock, kerr_propagate

RICHARDSON_TOL = 1e-4


class StencilInstabilityError(ValueError):
    """Richardson estimates of a chord derivative disagree."""


class QuadratureResolutionError(ValueError):
    pass


def _check(which, n):
    if which not in ("q", "p"):
        raise ValueError("which must be 'q' or 'p'")
    if int(n) != n or n < 0:
        raise ValueError("moment order must be a non-negative integer")
    return int(n)


def _apply(v, which, hbar):
    """``q v`` or ``p v`` for a Fock vector whose last entry is padding."""
    k = np.arange(1, v.size)
    lower = np.zeros_like(v)          # a v
    lower[:-1] = np.sqrt(k) * v[1:]
    raise_ = np.zeros_like(v)         # a^dagger v
    raise_[1:] = np.sqrt(k) * v[:-1]
    s = math.sqrt(hbar / 2.0)
    if which == "q":
        return s * (lower + raise_)
    return -1j * s * (lower - raise_)


def moment_quantum(state: FockState, which: str, n: int,
                   constants: Constants = DEFAULT_CONSTANTS, dim: int | None = None) -> float:
    """``<psi| q^n |psi>`` or ``<psi| p^n |psi>`` from ladder operators.

    The vector is padded to ``dim`` (default ``N + n``) so that applying
    ``n`` ladder operators never falls off the basis.
    """
    n = _check(which, n)
    need = state.truncation + n
    dim = need if dim is None else int(dim)
    if dim < need:
        raise TruncationError(f"basis of {dim} states cannot hold {n} ladder steps from N={state.truncation}")
    c = np.zeros(dim, dtype=complex)
    c[:state.truncation] = state.coeffs
    v = c
    for _ in range(n):
        v = _apply(v, which, constants.hbar)
    return float(np.vdot(c, v).real)


def coherent_mean_ladder(params: CoherentParams, t, constants: Constants = DEFAULT_CONSTANTS):
    """Closed form of ``<a>_t`` for a Kerr-evolved coherent state.

    Level spacings ``E_{n+1} - E_n = 8 hbar^2 (n + 1)`` give
    ``alpha exp(-8 i hbar t) exp(-|alpha|^2 (1 - exp(-8 i hbar t)))``.
    """
    a = params.label(constants)
    ph = np.exp(-8j * constants.hbar * np.asarray(t, float))
    return a * ph * np.exp(-abs(a) ** 2 * (1.0 - ph))


def _fd_weights(order: int):
    """Central stencil offsets/weights for the ``order``-th derivative, accuracy >= 4."""
    m = max(2, (order + 3) // 2)
    k = np.arange(-m, m + 1, dtype=float)
    a = np.vander(k, increasing=True).T
    rhs = np.zeros(2 * m + 1)
    rhs[order] = math.factorial(order)
    w = np.linalg.solve(a, rhs)
    accuracy = 2 * m + 1 - order
    accuracy += accuracy % 2          # symmetric stencils gain an order
    return k, w, accuracy


def chord_derivative(evaluator, axis: str, order: int, h: float):
    """Richardson-extrapolated central derivative of ``evaluator`` at the origin.

    Returns ``(estimate, coarse_estimate)`` built from step pairs ``(h, h/2)``
    and ``(2h, h)``.
    """
    k, w, acc = _fd_weights(order)
    steps = np.array([2 * h, h, h / 2])
    offs = np.multiply.outer(steps, k).ravel()
    zeros = np.zeros_like(offs)
    vals = evaluator(offs, zeros) if axis == "xi_p" else evaluator(zeros, offs)
    vals = np.asarray(vals).reshape(3, -1)
    d = (vals @ w) / steps ** order
    f = 2.0 ** acc
    fine = (f * d[2] - d[1]) / (f - 1.0)
    coarse = (f * d[1] - d[0]) / (f - 1.0)
    return fine, coarse


def moment_via_chord(evaluator, which: str, n: int, constants: Constants = DEFAULT_CONSTANTS,
                     h: float | None = None) -> float:
    """Moment from chord-function derivatives at the origin.

    Raises :class:`StencilInstabilityError` when the two Richardson estimates
    differ by more than ``RICHARDSON_TOL`` relative to the larger of the
    estimate and the vacuum scale ``(hbar/2)^(n/2)``.
    """
    n = _check(which, n)
    hb = constants.hbar
    if n == 0:
        return float((2 * np.pi * hb * np.asarray(evaluator(np.zeros(1), np.zeros(1)))[0]).real)
    h = 1e-2 * math.sqrt(hb) if h is None else float(h)
    axis = "xi_p" if which == "q" else "xi_q"
    fine, coarse = chord_derivative(evaluator, axis, n, h)
    pref = 2 * np.pi * hb * ((1j * hb) ** n if which == "q" else (-1j * hb) ** n)
    est, alt = pref * fine, pref * coarse
    scale = max(abs(est), (hb / 2.0) ** (n / 2.0))
    if abs(est - alt) > RICHARDSON_TOL * scale:
        raise StencilInstabilityError(f"Richardson estimates {est.real:.12g} and {alt.real:.12g} disagree")
    return float(est.real)


@dataclass
class MomentSeries:
    which: str
    n: int
    method: str
    t: np.ndarray
    values: np.ndarray
    ehrenfest_time: float


def moment_timeseries(params: CoherentParams, which: str, n: int, t_grid, method: str = "quantum",
                      constants: Constants = DEFAULT_CONSTANTS) -> MomentSeries:
    n = _check(which, n)
    t = np.asarray(t_grid, float)
    if np.any(np.diff(t) < 0):
        raise ValueError("t_grid must be sorted")
    if method == "quantum":
        s0 = coherent_fock(params, constants)
        vals = [moment_quantum(kerr_propagate(s0, ti, constants), which, n, constants) for ti in t]
    elif method == "twa":
        vals = [classical_moment(params, ti, which, n, constants, n_nodes=None) for ti in t]
    else:
        raise ValueError("method must be 'quantum' or 'twa'")
    return MomentSeries(which, n, method, t, np.array(vals), ehrenfest_time(params))


def moment_table(params: CoherentParams, t_grid, n_max: int = 3,
                 constants: Constants = DEFAULT_CONSTANTS) -> dict:
    """Every quantum and TWA moment up to ``n_max`` on ``t_grid``.

    Keys are column names such as ``q1_quantum`` or ``p3_twa``; ``t`` holds
    the grid.
    """
    t = np.asarray(t_grid, float)
    orders = range(1, int(n_max) + 1)
    cols = {"t": t}
    for which in "qp":
        for n in orders:
            cols[f"{which}{n}_quantum"] = np.empty(t.size)
            cols[f"{which}{n}_twa"] = np.empty(t.size)
    s0 = coherent_fock(params, constants)
    for i, ti in enumerate(t):
        st = kerr_propagate(s0, ti, constants)
        cl = classical_moments(params, ti, tuple(orders), constants)
        for which in "qp":
            for n in orders:
                cols[f"{which}{n}_quantum"][i] = moment_quantum(st, which, n, constants)
                cols[f"{which}{n}_twa"][i] = cl[(which, n)]
    return cols


def _correlation_nodes(Q, Delta, hbar, extent, n=None):
    half = 8.0 * hbar / Delta
    band = abs(Q) + extent + 8.0 * Delta
    d_max = np.pi * hbar / band
    need = int(math.ceil(2.0 * half / d_max)) + 1
    if n is None:
        n = need
    elif n < need:
        raise QuadratureResolutionError(
            f"{n} xi_p nodes on [-{half:g}, {half:g}] cannot resolve Q={Q:g}; need {need}")
    x = np.linspace(-half, half, int(n))
    w = np.full(x.size, x[1] - x[0])
    w[0] *= 0.5
    w[-1] *= 0.5
    return x, w


def _outer(evaluator, xi_p, xi_q):
    if hasattr(evaluator, "grid"):
        return np.asarray(evaluator.grid(xi_p, xi_q))
    pp, qq = np.meshgrid(xi_p, xi_q, indexing="ij")
    return np.asarray(evaluator(pp, qq))


def local_correlation(evaluator, xi_q, Q: float = 2.0, Delta: float = 1.0,
                      constants: Constants = DEFAULT_CONSTANTS, position_extent: float | None = None,
                      n_nodes: int | None = None, xi_p_cut: float | None = None):
    """Gaussian-windowed wavefunction correlation at ``xi_q`` around ``Q``, from the chord function.

    The integral over ``xi_p`` runs over ``[-8 hbar/Delta, 8 hbar/Delta]``;
    its spacing resolves both ``exp(i xi_p Q / hbar)`` and the chord
    function's own oscillation, set by the state's extent in q.  The
    normalisation is the same integral at ``xi_q = 0``, so ``C(0) = 1``.
    ``xi_p_cut`` drops nodes with ``|xi_p|`` above it (support checks).
    """
    if not Delta > 0:
        raise ValueError("Delta must be positive")
    hb = constants.hbar
    if position_extent is None:
        position_extent = getattr(evaluator, "position_extent", None)
    if position_extent is None:
        raise ValueError("position_extent is required for this evaluator")
    scalar = np.ndim(xi_q) == 0
    xq = np.atleast_1d(np.asarray(xi_q, float))
    x, w = _correlation_nodes(Q, Delta, hb, position_extent, n_nodes)
    if xi_p_cut is not None:
        w = np.where(np.abs(x) <= xi_p_cut, w, 0.0)
    g = w * np.exp(1j * x * Q / hb - Delta ** 2 * x ** 2 / (2 * hb ** 2))
    vals = _outer(evaluator, x, np.concatenate([[0.0], xq]))      # (n_xp, 1 + n_xq)
    integrals = g @ vals
    out = integrals[1:] / integrals[0]
    out[xq == 0.0] = 1.0
    return complex(out[0]) if scalar else out


def correlation_position_space(state: FockState, xi_q, Q: float = 2.0, Delta: float = 1.0,
                               constants: Constants = DEFAULT_CONSTANTS, n_quad: int = 4001):
    """The same correlation straight from wavefunction products (no chord function)."""
    from .quantum import wavefunction
    ext = state.support_radius(constants)
    xq = np.atleast_1d(np.asarray(xi_q, float))
    y = np.linspace(-ext, ext, n_quad)
    w = np.full(y.size, y[1] - y[0])
    w[0] *= 0.5
    w[-1] *= 0.5
    win = w * np.exp(-(y - Q) ** 2 / (2 * Delta ** 2)) / (math.sqrt(2 * math.pi) * Delta)

    def raw(s):
        return np.sum(win * wavefunction(state, y + s / 2, constants)
                      * np.conj(wavefunction(state, y - s / 2, constants)))

    nu = raw(0.0)
    return np.array([raw(s) / nu for s in xq])
