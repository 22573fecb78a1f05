import numpy as np
import pytest

from conftest import T1, T2
from kerrchord.core import CoherentParams, GridSpec, PhasePoint
from kerrchord.classical import (auto_gh_nodes, classical_moment, classical_moment_polar, classical_moments,
                                 ehrenfest_time, kerr_flow, kerr_flow_arrays, min_winding_chord,
                                 spiral_backbone, spiral_curve, twa_grid, twa_values,
                                 winding_chord_geometric)
from oracles import monte_carlo_moment, ode_flow

# polar-Bessel oracle at t = 0.05, 800 radial nodes
FROZEN_T005 = {("q", 1): -0.2808570172786257, ("q", 2): 12.814816423034586, ("q", 3): 8.04611521322375,
               ("p", 1): 1.816416295536298, ("p", 2): 13.185183576965416, ("p", 3): 34.85538612391789}


def test_origin_is_fixed():
    assert kerr_flow(PhasePoint(0.0, 0.0), 3.7) == PhasePoint(0.0, 0.0)


def test_period_of_circle():
    x = PhasePoint(3.0, 4.0)
    y = kerr_flow(x, 2 * np.pi / (4 * 25))
    assert (y.p, y.q) == pytest.approx((3.0, 4.0), abs=1e-12)


@pytest.mark.parametrize("p,q,t", [(3.0, 4.0, 0.05), (-1.2, 0.7, 0.9), (0.3, 5.5, T2)])
def test_flow_matches_ode(p, q, t):
    got = kerr_flow(PhasePoint(p, q), t)
    ref = ode_flow(p, q, t)
    assert (got.p, got.q) == pytest.approx(ref, abs=1e-9)


def test_flow_group_properties():
    rng = np.random.default_rng(0)
    p, q = rng.normal(size=(2, 200)) * 3
    pt, qt = kerr_flow_arrays(p, q, 0.07)
    assert np.allclose(pt ** 2 + qt ** 2, p ** 2 + q ** 2, rtol=1e-13)
    p2, q2 = kerr_flow_arrays(*kerr_flow_arrays(p, q, 0.03), 0.04)
    assert np.allclose((p2, q2), (pt, qt), atol=1e-12)
    pb, qb = kerr_flow_arrays(pt, qt, -0.07)
    assert np.allclose((pb, qb), (p, q), atol=1e-12)


def test_flow_preserves_area():
    h = 1e-6
    for p, q in [(3.0, 4.0), (0.5, -2.0)]:
        t = 0.08
        dp = (np.array(kerr_flow_arrays(p + h, q, t)) - np.array(kerr_flow_arrays(p - h, q, t))) / (2 * h)
        dq = (np.array(kerr_flow_arrays(p, q + h, t)) - np.array(kerr_flow_arrays(p, q - h, t))) / (2 * h)
        assert dp[0] * dq[1] - dp[1] * dq[0] == pytest.approx(1.0, abs=1e-6)


def test_twa_values(params):
    assert twa_values(params, 3.0, 4.0, 0.0) == pytest.approx(1 / np.pi)
    pt, qt = kerr_flow_arrays(3.0, 4.0, T2)
    assert twa_values(params, pt, qt, T2) == pytest.approx(1 / np.pi)


def test_twa_grid_normalised_and_positive(params):
    spec = GridSpec.square(-8, 8, 801)
    w = twa_grid(params, spec, T2)
    assert w.real.min() >= 0
    assert w.integral().real == pytest.approx(1.0, abs=1e-3)
    with pytest.raises(ValueError):
        twa_grid(params, GridSpec.square(-1, 1, 3, ("xi_p", "xi_q")), T2)


def test_moments_at_zero_closed_form(params):
    # Gaussian with variance 1/2 per axis
    m = classical_moments(params, 0.0)
    assert m[("q", 1)] == pytest.approx(4.0, abs=1e-10)
    assert m[("q", 2)] == pytest.approx(16.5, abs=1e-10)
    assert m[("q", 3)] == pytest.approx(64 + 3 * 4 * 0.5, abs=1e-10)
    assert m[("p", 2)] == pytest.approx(9.5, abs=1e-10)


@pytest.mark.parametrize("which,n", [("q", 1), ("p", 2), ("q", 3)])
def test_moment_monte_carlo(params, which, n):
    mean, se = monte_carlo_moment(3.0, 4.0, 0.01, which, n)
    assert abs(classical_moment(params, 0.01, which, n) - mean) < 3 * se


def test_gh_doubling_stable_before_ehrenfest(params):
    for t in (T1, 0.03, ehrenfest_time(params)):
        for which in "qp":
            for n in (1, 2, 3):
                a = classical_moment(params, t, which, n, n_nodes=None)
                b = classical_moment(params, t, which, n, n_nodes=2 * auto_gh_nodes(params, t, n))
                assert a == pytest.approx(b, abs=1e-8)


@pytest.mark.parametrize("t", [0.0, T1, T2, 0.2, 0.39])
def test_gh_matches_polar(params, t):
    for which in "qp":
        for n in (1, 2, 3):
            ref = classical_moment_polar(params, t, which, n)
            assert classical_moment(params, t, which, n, n_nodes=None) == pytest.approx(ref, abs=1e-9)


def test_frozen_moments(params):
    got = classical_moments(params, 0.05)
    for key, val in FROZEN_T005.items():
        assert got[key] == pytest.approx(val, abs=1e-10)


def test_moment_order_validation(params):
    with pytest.raises(ValueError):
        classical_moment(params, 0.1, "x", 1)
    with pytest.raises(ValueError):
        classical_moment(params, 0.1, "q", -1)


def test_ehrenfest_time(params):
    assert ehrenfest_time(params) == pytest.approx(2 * np.pi / 100)


def test_min_winding_chord(params):
    # pi / (4 * 0.071 * 5) = 2.21239
    assert min_winding_chord(params, T2) == pytest.approx(2.212389192668868, abs=1e-12)
    assert min_winding_chord(params, 0.2) * 0.2 == pytest.approx(min_winding_chord(params, 0.1) * 0.1)
    with pytest.raises(ValueError):
        min_winding_chord(params, 0.0)


def test_angle_difference_across_filament(params):
    # two points on the initial radial line, radial gap d: angles differ by 8 t X d
    t, d = 0.05, 0.01
    x = params.radius
    _, theta, r = spiral_backbone(params, t, x - d / 2, x + d / 2, 2)
    assert abs(theta[0] - theta[1]) == pytest.approx(8 * t * x * d, rel=0.01)


def test_spiral_curve_is_circle_at_zero(params):
    c = spiral_curve(params, 0.0, radius=0.7)
    assert np.allclose(np.hypot(c[:, 0] - 3, c[:, 1] - 4), 0.7)
    with pytest.raises(ValueError):
        spiral_curve(params, -1.0)


def test_geometric_winding_estimate(params):
    for t in (0.08, 0.1, 0.12):
        w = winding_chord_geometric(params, t)
        assert abs(w.global_min - w.formula) / w.formula < 0.25
        assert w.global_min <= w.vertical


def test_no_second_winding_early(params):
    w = winding_chord_geometric(params, 0.001)
    assert w.global_min == np.inf and w.vertical == np.inf


def test_hbar_scaling_of_twa():
    from kerrchord.core import Constants
    h = Constants(0.5)
    p = CoherentParams(1.0, 1.0)
    assert twa_values(p, 1.0, 1.0, 0.0, h) == pytest.approx(1 / (np.pi * 0.5))
