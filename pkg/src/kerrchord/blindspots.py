"""Blind spots: zeros of chord functions, where the translated state is orthogonal to itself.

Candidates are crossings of the nodal lines ``Re chi = 0`` and ``Im chi = 0``
on a sampled field.  Each is polished by damped Newton on ``(Re chi, Im chi)``
against a pointwise evaluator, then merged, classified against the classical
(TCA) zeros and against the winding threshold ``xi_m``.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.interpolate import RectBivariateSpline

from . import kernels
from .classical import min_winding_chord
from .core import CHORD_AXES, DEFAULT_CONSTANTS, Chord, CoherentParams, ComplexField2D, Constants, GridSpec
from .quantum import ExactChord, chord_grid_exact, kerr_propagate, coherent_fock

log = logging.getLogger(__name__)

CLASSICAL = "classical-matched"
QUANTUM_ONLY = "quantum-only"
UNCLASSIFIED = "unclassified"


@dataclass
class NodalLineSet:
    part: str
    polylines: list
    saddle_cells: int = 0

    @property
    def n_vertices(self) -> int:
        return sum(len(p) for p in self.polylines)


@dataclass(frozen=True)
class BlindSpot:
    chord: Chord
    residual: float
    classification: str = UNCLASSIFIED
    distance: float = 0.0
    iterations: int = 0

    def to_dict(self):
        return {"xi_p": self.chord.xi_p, "xi_q": self.chord.xi_q, "residual": self.residual,
                "classification": self.classification, "distance": self.distance}


@dataclass
class ZeroSet:
    """Refined zeros sorted by distance to the origin.

    ``failures`` holds candidates whose Newton iteration did not converge and
    ``outside`` those that converged to a zero beyond the field's window.
    """

    zeros: list
    failures: list = field(default_factory=list)
    outside: list = field(default_factory=list)
    tolerance: float = 0.0
    meta: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.zeros)

    def points(self) -> np.ndarray:
        if not self.zeros:
            return np.empty((0, 2))
        return np.array([[z.chord.xi_p, z.chord.xi_q] for z in self.zeros])

    def distances(self) -> np.ndarray:
        return np.array([z.distance for z in self.zeros])

    def nearest(self):
        return self.zeros[0] if self.zeros else None


def _to_coords(spec: GridSpec, fa, fb):
    return spec.min_a + fa * spec.spacing_a, spec.min_b + fb * spec.spacing_b


def _part_values(field2d: ComplexField2D, part: str):
    if part == "real":
        return field2d.values.real
    if part == "imaginary":
        return field2d.values.imag
    raise ValueError("part must be 'real' or 'imaginary'")


def _stitch(eids):
    """Chain segment indices into polylines through shared cell-edge ids."""
    by_edge = {}
    for k, (e0, e1) in enumerate(eids):
        by_edge.setdefault(int(e0), []).append(k)
        by_edge.setdefault(int(e1), []).append(k)
    used = np.zeros(len(eids), dtype=bool)
    chains = []

    def walk(start, entry_edge):
        chain = [(start, entry_edge)]
        used[start] = True
        edge = int(eids[start][1] if eids[start][0] == entry_edge else eids[start][0])
        while True:
            nxt = [k for k in by_edge.get(edge, ()) if not used[k]]
            if not nxt:
                return chain, edge
            k = nxt[0]
            used[k] = True
            chain.append((k, edge))
            edge = int(eids[k][1] if eids[k][0] == edge else eids[k][0])

    # open chains first (start at an edge touched by one segment), then loops
    for e, segs in by_edge.items():
        if len(segs) == 1 and not used[segs[0]]:
            chains.append(walk(segs[0], e))
    for k in range(len(eids)):
        if not used[k]:
            chains.append(walk(k, int(eids[k][0])))
    return chains


def nodal_lines(field2d: ComplexField2D, part: str) -> NodalLineSet:
    """Zero contours of the real or imaginary part as polylines in chord coordinates."""
    values = _part_values(field2d, part)
    segs, cells, eids = kernels.marching_segments(values)
    spec = field2d.spec
    # map edge id -> crossing point, so shared vertices are bitwise identical
    vertex = {}
    for k in range(len(segs)):
        vertex[int(eids[k, 0])] = (segs[k, 0], segs[k, 1])
        vertex[int(eids[k, 1])] = (segs[k, 2], segs[k, 3])
    polylines = []
    for chain, last_edge in _stitch(eids):
        edges = [entry for _, entry in chain] + [last_edge]
        idx = np.array([vertex[e] for e in edges])
        a, b = _to_coords(spec, idx[:, 0], idx[:, 1])
        polylines.append(np.column_stack([a, b]))
    ncell = np.unique(cells, axis=0).shape[0] if len(cells) else 0
    saddles = len(cells) - ncell
    if saddles:
        log.debug("%d saddle cells in the %s part resolved by centre value", saddles, part)
    return NodalLineSet(part=part, polylines=polylines, saddle_cells=int(saddles))


def nodal_candidates(field2d: ComplexField2D) -> np.ndarray:
    """Crossings of the real and imaginary nodal lines, rows ``(xi_p, xi_q)``."""
    re_segs, re_cells, _ = kernels.marching_segments(field2d.values.real)
    im_segs, im_cells, _ = kernels.marching_segments(field2d.values.imag)
    if len(re_segs) == 0 or len(im_segs) == 0:
        return np.empty((0, 2))
    pts, _ = kernels.segment_intersections(re_segs, re_cells, im_segs, im_cells, field2d.spec.shape)
    a, b = _to_coords(field2d.spec, pts[:, 0], pts[:, 1])
    return np.column_stack([a, b])


def newton_refine(evaluator, start: np.ndarray, target: float, max_iter: int = 50,
                  fd_step: float = 1e-6):
    """Damped Newton on ``(Re f, Im f)`` with a central-difference Jacobian.

    Works on all candidates at once.  Returns ``(points, residuals,
    iterations, converged)``.
    """
    x = np.array(start, dtype=float, copy=True)
    f = evaluator(x[:, 0], x[:, 1])
    res = np.abs(f)
    iters = np.zeros(len(x), dtype=int)
    done = res <= target
    for it in range(max_iter):
        act = np.nonzero(~done)[0]
        if act.size == 0:
            break
        xa = x[act]
        fa = f[act]
        dp = (evaluator(xa[:, 0] + fd_step, xa[:, 1]) - evaluator(xa[:, 0] - fd_step, xa[:, 1])) / (2 * fd_step)
        dq = (evaluator(xa[:, 0], xa[:, 1] + fd_step) - evaluator(xa[:, 0], xa[:, 1] - fd_step)) / (2 * fd_step)
        # Jacobian of (Re f, Im f) w.r.t. (xi_p, xi_q)
        j11, j12, j21, j22 = dp.real, dq.real, dp.imag, dq.imag
        det = j11 * j22 - j12 * j21
        det = np.where(np.abs(det) > 1e-300, det, 1e-300)
        sp = -(j22 * fa.real - j12 * fa.imag) / det
        sq = -(-j21 * fa.real + j11 * fa.imag) / det
        lam = np.ones(act.size)
        best = np.abs(fa)
        new_x = xa.copy()
        new_f = fa.copy()
        pending = np.ones(act.size, dtype=bool)
        for _ in range(12):
            idx = np.nonzero(pending)[0]
            if idx.size == 0:
                break
            trial = xa[idx] + lam[idx, None] * np.column_stack([sp[idx], sq[idx]])
            ft = evaluator(trial[:, 0], trial[:, 1])
            ok = np.abs(ft) < best[idx]
            new_x[idx[ok]] = trial[ok]
            new_f[idx[ok]] = ft[ok]
            pending[idx[ok]] = False
            lam[idx[~ok]] *= 0.5
        # a step that never improved still moves by the smallest trial so the loop can escape
        stuck = np.nonzero(pending)[0]
        if stuck.size:
            trial = xa[stuck] + lam[stuck, None] * np.column_stack([sp[stuck], sq[stuck]])
            new_x[stuck] = trial
            new_f[stuck] = evaluator(trial[:, 0], trial[:, 1])
        x[act] = new_x
        f[act] = new_f
        res[act] = np.abs(new_f)
        iters[act] = it + 1
        done[act] = res[act] <= target
    return x, res, iters, done


def _in_window(spec: GridSpec, pts):
    return ((pts[:, 0] >= spec.min_a) & (pts[:, 0] <= spec.max_a)
            & (pts[:, 1] >= spec.min_b) & (pts[:, 1] <= spec.max_b))


def find_zeros(evaluator, field2d: ComplexField2D, rel_tol: float = 1e-8,
               max_iter: int = 50) -> ZeroSet:
    """Blind spots of ``field2d`` refined against ``evaluator``.

    ``evaluator(xi_p, xi_q)`` must broadcast over arrays and represent the
    same function as the sampled field.
    """
    if tuple(field2d.spec.axis_labels) != CHORD_AXES:
        raise ValueError(f"find_zeros needs a chord field with axes {CHORD_AXES}")
    spec = field2d.spec
    target = rel_tol * field2d.max_abs()
    cand = nodal_candidates(field2d)
    meta = {"candidates": int(len(cand)), "rel_tol": rel_tol, "max_iter": max_iter,
            "grid": spec.to_dict()}
    if len(cand) == 0:
        return ZeroSet([], tolerance=target, meta=meta)
    pts, res, iters, ok = newton_refine(evaluator, cand, target, max_iter)
    fails = [BlindSpot(Chord(float(a), float(b)), float(r), UNCLASSIFIED, float(np.hypot(a, b)), int(n))
             for (a, b), r, n in zip(cand[~ok], res[~ok], iters[~ok])]
    good = ok & _in_window(spec, pts)
    outside = [BlindSpot(Chord(float(a), float(b)), float(r), UNCLASSIFIED, float(np.hypot(a, b)), int(n))
               for (a, b), r, n in zip(pts[ok & ~good], res[ok & ~good], iters[ok & ~good])]
    zeros = _merge(pts[good], res[good], iters[good], 0.5 * min(spec.spacing_a, spec.spacing_b))
    meta["failed"] = len(fails)
    meta["outside"] = len(outside)
    return ZeroSet(zeros, fails, _sort(outside), target, meta)


def _sort(spots):
    return sorted(spots, key=lambda z: (round(z.distance, 12), z.chord.xi_p, z.chord.xi_q))


def _merge(pts, res, iters, radius):
    order = np.lexsort((pts[:, 1], pts[:, 0], np.round(np.hypot(pts[:, 0], pts[:, 1]), 12)))
    kept = []
    for k in order:
        if any(np.hypot(*(pts[k] - pts[j])) < radius for j in kept):
            continue
        kept.append(k)
    return _sort([BlindSpot(Chord(float(pts[k, 0]), float(pts[k, 1])), float(res[k]), UNCLASSIFIED,
                            float(np.hypot(pts[k, 0], pts[k, 1])), int(iters[k])) for k in kept])


class InterpolatedChord:
    """Bicubic interpolant of a sampled chord field, usable as a pointwise evaluator."""

    def __init__(self, field2d: ComplexField2D):
        spec = field2d.spec
        a, b = spec.axis_a(), spec.axis_b()
        self.spec = spec
        self._re = RectBivariateSpline(a, b, field2d.values.real, kx=3, ky=3)
        self._im = RectBivariateSpline(a, b, field2d.values.imag, kx=3, ky=3)

    def __call__(self, xi_p, xi_q):
        xp, xq = np.broadcast_arrays(np.asarray(xi_p, float), np.asarray(xi_q, float))
        re = self._re.ev(xp.ravel(), xq.ravel())
        im = self._im.ev(xp.ravel(), xq.ravel())
        return (re + 1j * im).reshape(xp.shape)

    def grid(self, xi_p, xi_q):
        xi_p = np.atleast_1d(np.asarray(xi_p, float))
        xi_q = np.atleast_1d(np.asarray(xi_q, float))
        return self._re(xi_p, xi_q) + 1j * self._im(xi_p, xi_q)


def classify_and_threshold(quantum_zeros: ZeroSet, tca_zeros: ZeroSet, xi_m: float,
                           match_tol: float = 0.05):
    """Tag quantum zeros that have a TCA zero within ``match_tol``; summarise by the xi_m disc.

    Returns ``(annotated ZeroSet, summary dict)``.
    """
    tca_pts = tca_zeros.points()
    tagged = []
    for z in quantum_zeros.zeros:
        hit = False
        if len(tca_pts):
            d = np.hypot(tca_pts[:, 0] - z.chord.xi_p, tca_pts[:, 1] - z.chord.xi_q)
            hit = bool(np.min(d) <= match_tol)
        tagged.append(replace(z, classification=CLASSICAL if hit else QUANTUM_ONLY))
    annotated = ZeroSet(tagged, list(quantum_zeros.failures), list(quantum_zeros.outside),
                        quantum_zeros.tolerance, dict(quantum_zeros.meta))

    def region(sel):
        n = len(sel)
        m = sum(z.classification == CLASSICAL for z in sel)
        return {"count": n, "matched": m, "fraction": (m / n) if n else None}

    inside = [z for z in tagged if z.distance < xi_m]
    outside = [z for z in tagged if z.distance >= xi_m]
    q_only = [z.distance for z in tagged if z.classification == QUANTUM_ONLY]
    matched = [z.distance for z in tagged if z.classification == CLASSICAL]
    summary = {"xi_m": float(xi_m), "match_tol": float(match_tol),
               "inside": region(inside), "outside": region(outside),
               "nearest_quantum_only": min(q_only) if q_only else None,
               "farthest_classical_matched": max(matched) if matched else None}
    return annotated, summary


@dataclass(frozen=True)
class TrackPoint:
    t: float
    distance: float
    n_zeros: int
    diagnostics: dict


def quantum_zeros(params: CoherentParams, t: float, window: float = 6.0, res: int = 256,
                  constants: Constants = DEFAULT_CONSTANTS, state0=None):
    """Exact chord field on ``[-window, window]^2`` and its refined zeros."""
    state0 = state0 if state0 is not None else coherent_fock(params, constants)
    state = kerr_propagate(state0, t, constants)
    spec = GridSpec.square(-window, window, res, CHORD_AXES)
    chi = chord_grid_exact(state, spec, constants)
    return chi, find_zeros(ExactChord(state, constants), chi)


def track_nearest(params: CoherentParams, times, constants: Constants = DEFAULT_CONSTANTS,
                  window: float = 6.0, res: int = 256) -> list:
    """Distance of the nearest quantum blind spot to the origin for each time.

    ``distance`` is ``inf`` when no zero lies in the window; the reason is kept
    in ``diagnostics``.
    """
    times = [float(t) for t in times]
    if any(t <= 0 for t in times):
        raise ValueError("track_nearest needs positive times")
    if any(b < a for a, b in zip(times, times[1:])):
        raise ValueError("times must be sorted")
    state0 = coherent_fock(params, constants)
    out = []
    for t in times:
        try:
            _, zs = quantum_zeros(params, t, window, res, constants, state0)
            diag = dict(zs.meta)
            if zs.zeros:
                out.append(TrackPoint(t, zs.zeros[0].distance, len(zs), diag))
            else:
                diag["error"] = "no zeros in window"
                out.append(TrackPoint(t, float("inf"), 0, diag))
        except (ValueError, FloatingPointError) as exc:
            out.append(TrackPoint(t, float("nan"), 0, {"error": str(exc)}))
    return out


def threshold_radius(params: CoherentParams, t: float, constants: Constants = DEFAULT_CONSTANTS) -> float:
    return min_winding_chord(params, t, constants)
