"""Classical Kerr flow, the truncated Wigner approximation and spiral geometry.

For ``H = (p^2 + q^2)^2`` Hamilton's equations give ``dq/dt = w p`` and
``dp/dt = -w q`` with ``w = 4 (p^2 + q^2)`` constant on each orbit, so the flow
is a clockwise rotation of the (q, p) plane by the radius-dependent angle ``w t``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import comb, ive, roots_hermitenorm

from .core import (DEFAULT_CONSTANTS, WIGNER_AXES, CoherentParams, ComplexField2D, Constants,
                   GridSpec, PhasePoint)

DEFAULT_GH_NODES = 61


def angular_frequency(p, q):
    return 4.0 * (np.asarray(p) ** 2 + np.asarray(q) ** 2)


def kerr_flow_arrays(p, q, t):
    """Vectorised flow: returns ``(p(t), q(t))`` for initial arrays ``p``, ``q``."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    angle = angular_frequency(p, q) * t
    c, s = np.cos(angle), np.sin(angle)
    return p * c - q * s, q * c + p * s


def kerr_flow(x: PhasePoint, t: float) -> PhasePoint:
    p, q = kerr_flow_arrays(x.p, x.q, t)
    return PhasePoint(p=float(p), q=float(q))


def hamilton_rhs(_t, y):
    """Right-hand side for ``y = (p, q)``; used by the ODE cross-check."""
    p, q = y
    w = angular_frequency(p, q)
    return [-w * q, w * p]


def ehrenfest_time(params: CoherentParams) -> float:
    """One revolution of the packet centre, ``2 pi / (4 |alpha|^2)``."""
    return 2.0 * np.pi / angular_frequency(params.alpha_p, params.alpha_q)


def initial_wigner(params: CoherentParams, p, q, constants: Constants = DEFAULT_CONSTANTS):
    h = constants.hbar
    d2 = (np.asarray(p) - params.alpha_p) ** 2 + (np.asarray(q) - params.alpha_q) ** 2
    return np.exp(-d2 / h) / (np.pi * h)


def twa_values(params: CoherentParams, p, q, t: float, constants: Constants = DEFAULT_CONSTANTS):
    """Initial Gaussian pulled back along the flow: ``W_alpha(x(x', -t))``."""
    p0, q0 = kerr_flow_arrays(p, q, -t)
    return initial_wigner(params, p0, q0, constants)


def twa_wigner(params: CoherentParams, x_final: PhasePoint, t: float,
               constants: Constants = DEFAULT_CONSTANTS) -> float:
    return float(twa_values(params, x_final.p, x_final.q, t, constants))


def twa_grid(params: CoherentParams, spec: GridSpec, t: float,
             constants: Constants = DEFAULT_CONSTANTS) -> ComplexField2D:
    if tuple(spec.axis_labels) != WIGNER_AXES:
        raise ValueError(f"TWA grid needs axes {WIGNER_AXES}, got {spec.axis_labels}")
    pp, qq = spec.meshgrid()
    values = twa_values(params, pp, qq, t, constants)
    return ComplexField2D(spec, values.astype(complex), kind="wigner",
                          meta={"route": "twa", "t": float(t), "hbar": constants.hbar})


def gaussian_nodes(params: CoherentParams, constants: Constants = DEFAULT_CONSTANTS,
                   n_nodes: int = DEFAULT_GH_NODES):
    """Tensor Gauss-Hermite nodes/weights for the initial Gaussian (weights sum to 1)."""
    z, w = roots_hermitenorm(int(n_nodes))
    w = w / w.sum()
    sigma = np.sqrt(constants.hbar / 2.0)
    zp, zq = np.meshgrid(z, z, indexing="ij")
    p = params.alpha_p + sigma * zp
    q = params.alpha_q + sigma * zq
    return p, q, np.outer(w, w)


def auto_gh_nodes(params: CoherentParams, t: float, n: int,
                  constants: Constants = DEFAULT_CONSTANTS, cap: int = 2000) -> int:
    """Node count that resolves the radial phase ``exp(i n 4 r^2 t)`` of an n-th moment.

    In units of the Gaussian width the integrand oscillates with frequency
    ``kappa ~ 8 n t r sigma``; Gauss-Hermite needs roughly ``kappa^2 / 2``
    nodes once that frequency is large.  Never below the 61-node default.
    """
    sigma = np.sqrt(constants.hbar / 2.0)
    r_eff = params.radius + 4.0 * sigma
    kappa = 8.0 * max(int(n), 1) * abs(t) * r_eff * sigma
    return int(min(cap, max(DEFAULT_GH_NODES, np.ceil(0.5 * kappa ** 2) + 20)))


def _check_order(which, n):
    if which not in ("q", "p"):
        raise ValueError("which must be 'q' or 'p'")
    if int(n) != n or n < 0:
        raise ValueError("moment order must be a non-negative integer")


def classical_moment(params: CoherentParams, t: float, which: str, n: int,
                     constants: Constants = DEFAULT_CONSTANTS,
                     n_nodes: int | None = DEFAULT_GH_NODES) -> float:
    """``E[q(t)^n]`` or ``E[p(t)^n]`` over the initial Gaussian carried by the flow.

    ``n_nodes=None`` picks :func:`auto_gh_nodes`, which matters past the
    Ehrenfest time where the 61-node default no longer converges.
    """
    _check_order(which, n)
    if n_nodes is None:
        n_nodes = auto_gh_nodes(params, t, n, constants)
    p, q, w = gaussian_nodes(params, constants, n_nodes)
    pt, qt = kerr_flow_arrays(p, q, t)
    g = qt if which == "q" else pt
    return float(np.sum(w * g ** n))


def classical_moments(params: CoherentParams, t: float, orders=(1, 2, 3),
                      constants: Constants = DEFAULT_CONSTANTS,
                      n_nodes: int | None = None) -> dict:
    """All ``(which, n)`` moments for one time from a single flow evaluation."""
    orders = tuple(int(n) for n in orders)
    for n in orders:
        _check_order("q", n)
    if n_nodes is None:
        n_nodes = auto_gh_nodes(params, t, max(orders, default=1), constants)
    p, q, w = gaussian_nodes(params, constants, n_nodes)
    pt, qt = kerr_flow_arrays(p, q, t)
    out = {}
    for which, g in (("q", qt), ("p", pt)):
        for n in orders:
            out[(which, n)] = float(np.sum(w * g ** n))
    return out


def classical_moment_polar(params: CoherentParams, t: float, which: str, n: int,
                           constants: Constants = DEFAULT_CONSTANTS, n_radial: int = 800) -> float:
    """Same moment with the angular integral done in closed form.

    In polar coordinates the flow only shifts the angle, and the angular
    average of ``cos^n`` or ``sin^n`` against the Gaussian reduces to modified
    Bessel functions.  The remaining radial integral uses Gauss-Legendre.
    Independent of the tensor quadrature, so it serves as its oracle.
    """
    _check_order(which, n)
    h = constants.hbar
    x_c = params.radius
    phi0 = np.arctan2(params.alpha_p, params.alpha_q)
    lo = max(0.0, x_c - 12.0 * np.sqrt(h))
    hi = x_c + 12.0 * np.sqrt(h)
    z, w = np.polynomial.legendre.leggauss(n_radial)
    r = 0.5 * (hi - lo) * z + 0.5 * (hi + lo)
    w = 0.5 * (hi - lo) * w
    ang = np.zeros_like(r, dtype=complex)
    for j in range(n + 1):
        k = 2 * j - n
        if which == "q":
            b = comb(n, j) / 2.0 ** n
        else:
            b = comb(n, j) * (-1) ** (n - j) / (2j) ** n
        # ive carries exp(-arg), folded into the radial Gaussian below
        ang += b * ive(abs(k), 2.0 * r * x_c / h) * np.exp(1j * k * (phi0 - 4.0 * r * r * t))
    radial = (2.0 / h) * r ** (n + 1) * np.exp(-(r - x_c) ** 2 / h)
    return float(np.real(np.sum(w * radial * ang)))


def min_winding_chord(params: CoherentParams, t: float, constants: Constants = DEFAULT_CONSTANTS) -> float:
    """Estimated shortest chord joining adjacent spiral windings, ``pi / (4 t X)``."""
    if not t > 0:
        raise ValueError("min_winding_chord needs t > 0")
    return np.pi / (4.0 * t * params.radius)


def spiral_curve(params: CoherentParams, t: float, n_samples: int = 2000,
                 radius: float | None = None, constants: Constants = DEFAULT_CONSTANTS) -> np.ndarray:
    """Image under the flow of a circle around the packet centre; rows are (p, q)."""
    if t < 0:
        raise ValueError("spiral_curve needs t >= 0")
    rho = np.sqrt(constants.hbar) if radius is None else radius
    phi = np.linspace(0.0, 2.0 * np.pi, n_samples, endpoint=False)
    p0 = params.alpha_p + rho * np.sin(phi)
    q0 = params.alpha_q + rho * np.cos(phi)
    p, q = kerr_flow_arrays(p0, q0, t)
    return np.column_stack([p, q])


def spiral_backbone(params: CoherentParams, t: float, r_min: float, r_max: float,
                    n_samples: int = 20000):
    """Image of the radial line through the packet centre, ``r in [r_min, r_max]``.

    Returns ``(points, unwrapped_angle, r)``; points are rows (p, q).  The
    unwrapped polar angle separates windings: two points lie on different
    windings when their unwrapped angles differ by about ``2 pi``.
    """
    theta0 = np.arctan2(params.alpha_p, params.alpha_q)
    r = np.linspace(r_min, r_max, n_samples)
    theta = theta0 - angular_frequency(r, 0.0) * t
    pts = np.column_stack([r * np.sin(theta), r * np.cos(theta)])
    return pts, theta, r


@dataclass(frozen=True)
class WindingChords:
    t: float
    formula: float
    global_min: float
    vertical: float

    def to_dict(self):
        return {"t": self.t, "formula": self.formula, "global_min": self.global_min,
                "vertical": self.vertical}


def winding_chord_geometric(params: CoherentParams, t: float, n_samples: int = 20000,
                            constants: Constants = DEFAULT_CONSTANTS) -> WindingChords:
    """Brute-force shortest chord from the centre's image to another winding.

    ``global_min`` is the nearest approach to any point of the backbone whose
    unwrapped angle differs by more than pi; ``vertical`` restricts the chord
    to the momentum direction (crossings of the line ``q = q_c``).  Both are
    ``inf`` when no other winding exists yet.
    """
    x_c = params.radius
    span = 2.0 * x_c + 6.0 * np.sqrt(constants.hbar)
    pts, theta, _ = spiral_backbone(params, t, 1e-9, span, n_samples)
    p_c, q_c = kerr_flow_arrays(params.alpha_p, params.alpha_q, t)
    theta_c = np.arctan2(params.alpha_p, params.alpha_q) - angular_frequency(x_c, 0.0) * t
    other = np.abs(theta - theta_c) > np.pi

    global_min = np.inf
    if np.any(other):
        seg_a = pts[:-1]
        seg_b = pts[1:]
        use = other[:-1] & other[1:]
        global_min = _point_segment_distance(np.array([p_c, q_c]), seg_a[use], seg_b[use])

    vertical = np.inf
    dq = pts[:, 1] - q_c
    cross = np.nonzero((np.sign(dq[:-1]) != np.sign(dq[1:])) & other[:-1] & other[1:])[0]
    if cross.size:
        f = dq[cross] / (dq[cross] - dq[cross + 1])
        p_cross = pts[cross, 0] + f * (pts[cross + 1, 0] - pts[cross, 0])
        vertical = float(np.min(np.abs(p_cross - p_c)))
    return WindingChords(float(t), min_winding_chord(params, t), float(global_min), vertical)


def _point_segment_distance(x, a, b):
    if len(a) == 0:
        return np.inf
    d = b - a
    L2 = np.einsum("ij,ij->i", d, d)
    s = np.clip(np.einsum("ij,ij->i", x - a, d) / np.where(L2 > 0, L2, 1.0), 0.0, 1.0)
    proj = a + s[:, None] * d
    return float(np.min(np.hypot(*(proj - x).T)))
