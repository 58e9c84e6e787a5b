import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from parkguard.grid import DomainMask, Grid, GridError, ScalarField
from parkguard.terrain import (
    MAX_SPEED,
    ElevationModel,
    EsriParseError,
    disc_mask,
    load_esri_ascii,
    make_synthetic_terrain,
    nodata_mask,
    polygon_mask,
    rectangle_mask,
    road_walking_speed,
    slope_magnitude,
    speed_field,
    walking_speed,
    write_esri_ascii,
)

HEADER = "ncols {nc}\nnrows {nr}\nxllcorner 0\nyllcorner 0\ncellsize {cs}\nNODATA_value -9999\n"


def _inner_mask(grid, k=2):
    m = np.zeros(grid.shape, bool)
    m[k:-k, k:-k] = True
    return DomainMask(grid, m)


# ------------------------------------------------------------------ ESRI

def test_load_constant_grid():
    f = load_esri_ascii(HEADER.format(nc=3, nr=3, cs=10) + "7 7 7\n7 7 7\n7 7 7\n")
    assert f.values.shape == (3, 3) and np.all(f.values == 7.0)
    assert f.grid.cellsize == 10 and f.grid.origin == (0.0, 0.0)


def test_load_flags_nodata():
    f = load_esri_ascii(HEADER.format(nc=3, nr=3, cs=1) + "1 2 3\n4 -9999 6\n7 8 9\n")
    assert f.nodata_mask.sum() == 1 and f.nodata_mask[1, 1]


def test_load_flips_rows_to_south_first():
    f = load_esri_ascii(HEADER.format(nc=2, nr=2, cs=1) + "1 2\n3 4\n")
    assert f.values[0, 0] == 3 and f.values[1, 1] == 2


def test_load_header_variants():
    text = "NCOLS 2\nNROWS 2\nXLLCENTER 5\nYLLCENTER -5\nCELLSIZE 2\n1e0 2.5E1\n3 4\n"
    f = load_esri_ascii(text.encode())
    assert f.grid.origin == (5.0, -5.0)
    assert f.values[1, 1] == 25.0
    assert not f.nodata_mask.any()


@pytest.mark.parametrize("text,line", [
    ("ncols 2\nnrows 2\nxllcorner 0\nyllcorner 0\ncellsize 1\ndy 1\n1 2\n3 4\n", 6),
    ("ncols 2\nnrows 2\nxllcorner 0\nyllcorner 0\ncellsize 1\n1 2\n3\n", 7),
    ("ncols 2\nnrows 2\nxllcorner 0\nyllcorner 0\n1 2\n3 4\n", 5),
    ("ncols 2\nncols 2\n", 2),
    ("ncols two\n", 1),
    ("ncols 2\nnrows 2\nxllcorner 0\nyllcorner 0\ncellsize 1\n1 x\n3 4\n", 6),
])
def test_load_errors_carry_line_numbers(text, line):
    with pytest.raises(EsriParseError) as err:
        load_esri_ascii(text)
    assert err.value.line == line
    assert f"line {line}" in str(err.value)


@given(st.lists(st.floats(-1e6, 1e6, allow_nan=False), min_size=12, max_size=12),
       st.integers(0, 11))
def test_esri_round_trip_is_exact(vals, hole):
    v = np.array(vals).reshape(3, 4)
    v[hole // 4, hole % 4] = np.nan
    f = ScalarField(Grid(4, 3, 0.25, (1.5, -2.0)), v)
    back = load_esri_ascii(write_esri_ascii(f))
    assert back.grid == f.grid
    assert np.array_equal(back.nodata_mask, f.nodata_mask)
    assert np.array_equal(back.values[~back.nodata_mask], f.values[~f.nodata_mask])


# ----------------------------------------------------------------- slope

def test_slope_flat_and_ramp():
    g = Grid(9, 9, 1.0)
    flat = ElevationModel(ScalarField.constant(g, 3.0), _inner_mask(g))
    assert np.all(slope_magnitude(flat).values == 0)
    ramp = ElevationModel(ScalarField.from_function(g, lambda x, y: 0.5 * x), _inner_mask(g))
    assert np.allclose(slope_magnitude(ramp).values, 0.5)


def test_slope_of_sine():
    g = Grid.from_extent(-5, 5, -5, 5, 1.0)
    em = ElevationModel(ScalarField.from_function(g, lambda x, y: 100 * np.sin(x / 100)), _inner_mask(g))
    ix, iy = g.nearest_node((0, 0))
    assert slope_magnitude(em).values[iy, ix] == pytest.approx(1.0, abs=1e-3)


def test_slope_rejects_nodata_next_to_region():
    g = Grid(9, 9, 1.0)
    v = np.zeros(g.shape)
    v[1, 4] = np.nan  # just outside the region, inside its dilation
    em = ElevationModel(ScalarField(g, v), _inner_mask(g))
    with pytest.raises(GridError):
        slope_magnitude(em)


def test_elevation_model_rejects_nodata_inside():
    g = Grid(9, 9, 1.0)
    v = np.zeros(g.shape)
    v[4, 4] = np.nan
    with pytest.raises(GridError):
        ElevationModel(ScalarField(g, v), _inner_mask(g))


# ----------------------------------------------------------------- speed

def test_walking_speed_values():
    assert walking_speed(0.0) == pytest.approx(1.11 * math.exp(-4 / 2345))
    assert walking_speed(0.0) == pytest.approx(1.1081, abs=1e-4)
    assert walking_speed(10.0) < 1e-100
    ref = 0.11 + math.exp(-(62.0 ** 2) / 1800)
    assert abs(walking_speed(0.6) - ref) / ref < 0.15
    assert road_walking_speed(0.6) == pytest.approx(ref)
    with pytest.raises(ValueError):
        walking_speed(-0.1)


@given(st.floats(0, 50), st.floats(0, 50))
def test_walking_speed_decreasing_and_bounded(a, b):
    va, vb = walking_speed(a), walking_speed(b)
    assert va < MAX_SPEED and vb < MAX_SPEED
    if a < b:
        assert va >= vb
        if vb > 0 and b - a > 1e-6:
            assert va > vb


def test_speed_field_flat_cliff_and_lake():
    g = Grid(11, 11, 1.0)
    flat = ElevationModel(ScalarField.constant(g, 0.0), _inner_mask(g))
    sf = speed_field(flat, 0.01)
    assert np.allclose(sf.v.values, walking_speed(0.0))
    cliff = ElevationModel(ScalarField.from_function(g, lambda x, y: 5.0 * x), _inner_mask(g))
    assert np.all(speed_field(cliff, 0.01).v.values == 0.01)
    ov = np.ones(g.shape)
    ov[5, 5] = 0.0
    ov[3, 3] = np.nan
    sf = speed_field(flat, 0.01, ScalarField(g, ov))
    assert sf.v.values[5, 5] == 0.01
    assert sf.v.values[3, 3] == pytest.approx(walking_speed(0.0))
    with pytest.raises(ValueError):
        speed_field(flat, 0.0)


@given(st.floats(0, 3), st.floats(0, 2), st.floats(1e-3, 0.5))
def test_speed_field_bounds(slope, factor, v_min):
    g = Grid(9, 9, 1.0)
    em = ElevationModel(ScalarField.from_function(g, lambda x, y: slope * x * x / 8), _inner_mask(g))
    sf = speed_field(em, v_min, ScalarField.constant(g, factor))
    assert np.all(sf.v.values >= v_min)
    assert np.all(sf.v.values <= MAX_SPEED * max(1.0, factor))


# ------------------------------------------------------------------ masks

def test_masks():
    g = Grid.from_extent(-1.2, 1.2, -1.2, 1.2, 0.1)
    d = disc_mask(g, (0, 0), 1.0)
    assert d.area() == pytest.approx(math.pi, rel=0.05)
    r = rectangle_mask(g, -0.55, 0.55, -0.27, 0.27)
    assert r.count == 11 * 5
    p = polygon_mask(g, [(-0.55, -0.27), (0.55, -0.27), (0.55, 0.27), (-0.55, 0.27)])
    assert np.array_equal(p.inside, r.inside)


def test_nodata_mask_erodes_data_region():
    g = Grid(7, 7, 1.0)
    v = np.full(g.shape, np.nan)
    v[1:6, 1:6] = 1.0
    m = nodata_mask(ScalarField(g, v))
    assert m.count == 9 and m.inside[2:5, 2:5].all()


# -------------------------------------------------------------- synthetic

def test_synthetic_flat_disc():
    g = Grid.from_extent(-1.2, 1.2, -1.2, 1.2, 0.05)
    em = make_synthetic_terrain("flat", g, {"mask": {"kind": "disc", "radius": 1.0}})
    assert np.all(em.elevation.values == 0)
    assert np.array_equal(em.mask.inside, disc_mask(g, (0, 0), 1.0).inside)


def test_synthetic_ramp_has_constant_slope():
    g = Grid(21, 21, 1.0)
    em = make_synthetic_terrain("ramp", g, {"slope": 0.2, "direction": 30.0})
    s = slope_magnitude(em).values[1:-1, 1:-1]
    assert np.allclose(s, 0.2)


def test_synthetic_ridge_max_slope_at_inflection():
    h = 1.0
    g = Grid.from_extent(-100, 100, -10, 10, h)
    sigma = 20.0
    em = make_synthetic_terrain("ridge", g, {"height": 50.0, "sigma": sigma, "x0": 0.0})
    s = slope_magnitude(em).values[10]
    x_star = g.xs[np.argmax(s)]
    assert abs(abs(x_star) - sigma) <= h


def test_synthetic_unknown_kind():
    with pytest.raises(ValueError):
        make_synthetic_terrain("volcano", Grid(9, 9, 1.0))
