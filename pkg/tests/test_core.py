import dataclasses

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kerrchord.core import (CHORD_AXES, Chord, CoherentParams, ComplexField2D, Constants, GridSpec,
                            PhasePoint, grid_points, symplectic_product, trapezoid_weights)


def test_grid_corner_maps_to_minimum():
    spec = GridSpec.square(-1, 1, 3)
    first = next(iter(grid_points(spec)))
    assert first == ((0, 0), (-1.0, -1.0))


def test_grid_spacing_exact():
    assert GridSpec.square(-1, 1, 3).spacing_a == 1.0


def test_grid_last_point_is_max():
    spec = GridSpec.square(-8, 8, 512)
    assert spec.axis_a()[-1] == 8.0
    assert spec.coordinate(511, 511) == (8.0, 8.0)


def test_grid_points_lexicographic():
    spec = GridSpec(0, 1, 2, 0, 2, 3)
    idx = [ij for ij, _ in grid_points(spec)]
    assert idx == [(0, 0), (0, 1), (0, 2), (1, 0), (1, 1), (1, 2)]


@settings(max_examples=60, deadline=None)
@given(lo=st.floats(-50, 50), width=st.floats(0.1, 100), n=st.integers(2, 300),
       data=st.data())
def test_grid_index_round_trip(lo, width, n, data):
    spec = GridSpec.square(lo, lo + width, n)
    i = data.draw(st.integers(0, n - 1))
    j = data.draw(st.integers(0, n - 1))
    assert spec.index_of(*spec.coordinate(i, j)) == (i, j)


def test_grid_points_match_meshgrid():
    spec = GridSpec(-2, 3, 4, 1, 5, 6)
    aa, bb = spec.meshgrid()
    for (i, j), (a, b) in grid_points(spec):
        assert (a, b) == (aa[i, j], bb[i, j])


@pytest.mark.parametrize("bad", [dict(min_a=1, max_a=1), dict(n_a=1), dict(max_b=np.nan)])
def test_grid_rejects_invalid(bad):
    kw = dict(min_a=-1, max_a=1, n_a=4, min_b=-1, max_b=1, n_b=4)
    kw.update(bad)
    with pytest.raises(ValueError):
        GridSpec(**kw)


def test_index_outside_raises():
    with pytest.raises(IndexError):
        GridSpec.square(-1, 1, 5).index_of(3.0, 0.0)


def test_constants_and_points_validate():
    with pytest.raises(ValueError):
        Constants(hbar=0.0)
    with pytest.raises(ValueError):
        PhasePoint(np.inf, 0.0)
    with pytest.raises(ValueError):
        Chord(0.0, np.nan)
    with pytest.raises(ValueError):
        CoherentParams(alpha_q=np.nan)


def test_value_types_are_immutable():
    with pytest.raises(dataclasses.FrozenInstanceError):
        PhasePoint(1.0, 2.0).p = 3.0


def test_symplectic_product_convention():
    # x.J xi = q xi_p - p xi_q
    assert symplectic_product(p=2.0, q=3.0, xi_p=5.0, xi_q=7.0) == 3 * 5 - 2 * 7
    assert -Chord(1.0, -2.0) == Chord(-1.0, 2.0)


def test_coherent_label():
    label = CoherentParams(4.0, 3.0).label(Constants(2.0))
    assert label == pytest.approx(complex(4, 3) / 2.0)
    assert CoherentParams().radius == 5.0


def test_field_shape_check_and_integral():
    spec = GridSpec.square(-1, 1, 11)
    with pytest.raises(ValueError):
        ComplexField2D(spec, np.zeros((10, 11)))
    f = ComplexField2D(spec, np.ones(spec.shape))
    assert f.integral() == pytest.approx(4.0)
    assert trapezoid_weights(11, 0.2).sum() == pytest.approx(2.0)


def test_field_value_at():
    spec = GridSpec.square(-1, 1, 3, CHORD_AXES)
    v = np.arange(9, dtype=complex).reshape(3, 3)
    assert ComplexField2D(spec, v).value_at(0.0, 1.0) == 5
