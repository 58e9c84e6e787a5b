import itertools
import math
import os

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from parkguard.grid import DomainMask, Grid, GridError, Polyline, ScalarField, gradient_central, marching_squares, signed_distance
from parkguard.hj_solver import (
    FrontVanished,
    LevelSetState,
    NormalSpeed,
    SolverParams,
    boundary_phi0,
    cfl_timestep,
    computational_box,
    depth_field,
    eno2_derivatives,
    evolve,
    evolve_arrival_times,
    godunov_hamiltonian,
    redistance,
    rk2_step,
    solve_from_boundary,
)
from parkguard.terrain import disc_mask, rectangle_mask


def ring(r=1.0, c=(0.0, 0.0), n=1024):
    th = 2 * np.pi * np.arange(n) / n
    return Polyline(np.column_stack([c[0] + r * np.cos(th), c[1] + r * np.sin(th)]), closed=True)


def circle_phi(h, r=1.0, ext=1.3):
    g = Grid.from_extent(-ext, ext, -ext, ext, h)
    return signed_distance(g, [ring(r)], (0.0, 0.0))


def _hausdorff(a, b):
    pa = np.vstack([c.vertices for c in a])
    pb = np.vstack([c.vertices for c in b])
    d = np.hypot(pa[:, None, 0] - pb[None, :, 0], pa[:, None, 1] - pb[None, :, 1])
    return max(d.min(axis=1).max(), d.min(axis=0).max())


# ----------------------------------------------------------------- ENO2

def test_eno2_exact_for_linear():
    g = Grid(9, 7, 0.1)
    m, p = eno2_derivatives(ScalarField.from_function(g, lambda x, y: 2 * x), "x")
    assert np.allclose(m.values[:, 1:-1], 2.0) and np.allclose(p.values[:, 1:-1], 2.0)
    m, p = eno2_derivatives(ScalarField.from_function(g, lambda x, y: 2 * x), "y")
    assert np.allclose(m.values, 0.0)


def test_eno2_exact_for_quadratic():
    g = Grid.from_extent(0.0, 2.0, 0.0, 0.4, 0.1)
    m, p = eno2_derivatives(ScalarField.from_function(g, lambda x, y: x * x), "x")
    assert m.values[2, 10] == pytest.approx(2.0, abs=1e-12)
    assert p.values[2, 10] == pytest.approx(2.0, abs=1e-12)


def test_eno2_one_sided_at_kink():
    g = Grid.from_extent(-0.5, 0.5, 0.0, 0.4, 0.1)
    m, p = eno2_derivatives(ScalarField.from_function(g, lambda x, y: np.abs(x)), "x")
    assert m.values[2, 5] == pytest.approx(-1.0) and p.values[2, 5] == pytest.approx(1.0)


def test_eno2_needs_five_nodes():
    with pytest.raises(GridError):
        eno2_derivatives(ScalarField.constant(Grid(4, 9, 1.0), 0.0), "x")


# ------------------------------------------------------------- Godunov

def test_godunov_examples():
    assert godunov_hamiltonian(1.0, 1.0, -1.0, 0.0, 0.0) == 1.0
    assert godunov_hamiltonian(1.0, -1.0, 1.0, 0.0, 0.0) == 0.0
    assert godunov_hamiltonian(2.0, 3.0, 3.0, -4.0, -4.0) == pytest.approx(10.0)


@given(st.floats(0, 10), st.floats(-10, 10), st.floats(-10, 10))
def test_godunov_consistency(v, a, b):
    assert godunov_hamiltonian(v, a, a, b, b) == pytest.approx(v * math.hypot(a, b), rel=1e-12, abs=1e-150)


def test_godunov_consistency_all_sign_combinations():
    for sa, sb in itertools.product((-1, 0, 1), repeat=2):
        a, b = 0.7 * sa, 1.3 * sb
        assert godunov_hamiltonian(1.5, a, a, b, b) == pytest.approx(1.5 * math.hypot(a, b))


# ----------------------------------------------------------------- CFL

def test_cfl_timestep():
    g = Grid(5, 5, 0.1)
    assert cfl_timestep(np.ones(g.shape), 0.1, 0.5) == pytest.approx(0.025)
    assert cfl_timestep(2 * np.ones(g.shape), 0.1, 0.5) == pytest.approx(0.0125)
    assert cfl_timestep(np.full((3, 3), 1.1081), 10.0, 0.5) == pytest.approx(2.256, abs=1e-3)
    with pytest.raises(ValueError):
        cfl_timestep(np.zeros((3, 3)), 0.1)


def test_normal_speed_validation():
    g = Grid(3, 3, 1.0)
    with pytest.raises(ValueError):
        NormalSpeed(ScalarField.constant(g, -1.0))
    with pytest.raises(ValueError):
        SolverParams(cfl=1.5)
    with pytest.raises(ValueError):
        SolverParams(scheme="weno5")


# ------------------------------------------------------------------ RK2

def test_rk2_zero_speed_is_identity():
    phi = circle_phi(0.1)
    out = rk2_step(LevelSetState(phi), np.zeros(phi.grid.shape), 0.05)
    assert np.array_equal(out.phi.values, phi.values) and out.t == 0.05


def test_rk2_plane_moves_by_dt():
    g = Grid(9, 9, 0.1)
    phi = ScalarField.from_function(g, lambda x, y: x)
    out = rk2_step(LevelSetState(phi), np.ones(g.shape), 0.02)
    assert np.allclose((phi.values - out.phi.values)[:, 1:-1], 0.02)


def test_circle_shrinks_to_half_radius():
    h = 0.04
    phi = circle_phi(h)
    out = evolve(LevelSetState(phi), np.ones(phi.grid.shape), 0.5)
    assert out.t == pytest.approx(0.5)
    r = np.hypot(*np.vstack([c.vertices for c in marching_squares(out.phi, 0.0)]).T)
    assert np.max(np.abs(r - 0.5)) <= 2 * h


# ------------------------------------------------------------- redistance

def test_redistance_keeps_contour():
    h = 0.05
    phi = circle_phi(h)
    out = redistance(LevelSetState(phi, 0.3))
    assert out.t == 0.3
    assert _hausdorff(marching_squares(phi, 0.0), marching_squares(out.phi, 0.0)) < 0.5 * h


def test_redistance_restores_unit_gradient():
    h = 0.05
    g = Grid.from_extent(-2, 2, -2, 2, h)
    X, Y = g.mesh()
    phi = ScalarField(g, 10 * (1.0 - np.hypot(X / 1.2, Y / 0.9)))
    before = marching_squares(phi, 0.0)
    out = redistance(LevelSetState(phi))
    gx, gy = gradient_central(out.phi)
    d = np.abs(out.phi.values)
    sel = (d > 2 * h) & (out.phi.values < 0)  # outside: no medial-axis singularity
    sel[[0, -1], :] = sel[:, [0, -1]] = False
    assert np.all(np.abs(np.hypot(gx.values, gy.values)[sel] - 1) <= 0.05)
    assert _hausdorff(before, marching_squares(out.phi, 0.0)) <= h


def test_redistance_two_fronts_and_vanished():
    h = 0.05
    g = Grid.from_extent(-2, 2, -1, 1, h)
    X, Y = g.mesh()
    phi = ScalarField(g, np.maximum(0.5 - np.hypot(X + 1, Y), 0.5 - np.hypot(X - 1, Y)))
    out = redistance(LevelSetState(phi))
    assert len(marching_squares(out.phi, 0.0)) == 2
    with pytest.raises(FrontVanished):
        redistance(LevelSetState(ScalarField.constant(g, -1.0)))


# --------------------------------------------------------- arrival times

def test_disc_arrival_is_distance(disc04):
    T = disc04["depth"].T.values
    r = disc04["r"]
    sel = disc04["omega"].inside & (r < 0.9)
    assert np.max(np.abs(T[sel] - (1 - r[sel]))) <= 2 * 0.04
    assert disc04["depth"].d_max == pytest.approx(1.0, abs=0.08)
    assert not disc04["depth"].unreached_mask.any()


def test_double_speed_halves_arrival(disc04):
    om, phi0 = disc04["omega"], disc04["phi0"]
    T1 = disc04["depth"].T.values
    T2 = solve_from_boundary(om, np.full(om.grid.shape, 2.0), SolverParams(), phi0).T.values
    sel = om.inside
    assert np.max(np.abs(T2[sel] - T1[sel] / 2)) <= 0.04


def test_front_is_monotone(disc04):
    om, phi0 = disc04["omega"], disc04["phi0"]
    # raises if {phi >= 0} gains a node in any step
    solve_from_boundary(om, np.ones(om.grid.shape), SolverParams(check_monotone=True), phi0)


def test_walled_subregion_is_unreached():
    h = 0.05
    g = Grid.from_extent(-1.2, 1.2, -1.2, 1.2, h)
    om = disc_mask(g, (0, 0), 1.0)
    X, Y = g.mesh()
    r = np.hypot(X, Y)
    v = np.where((r > 0.3) & (r < 0.45), 1e-4, 1.0)
    res = solve_from_boundary(om, v, SolverParams(t_max=3.0))
    assert res.unreached_mask[r < 0.25].all()
    assert not res.unreached_mask[om.inside & (r > 0.5)].any()


def test_square_arrival_away_from_medial_axis():
    h = 0.04
    g = Grid.from_extent(-1.2, 1.2, -1.2, 1.2, h)
    om = rectangle_mask(g, -1.0, 1.0, -1.0, 1.0)
    T = depth_field(om).T.values
    X, Y = g.mesh()
    exact = 1.0 - np.maximum(np.abs(X), np.abs(Y))
    medial = np.abs(np.abs(X) - np.abs(Y)) / math.sqrt(2)
    sel = om.inside & (medial >= 3 * h)
    assert np.max(np.abs(T[sel] - exact[sel])) <= 2 * h


def test_depth_rectangle_and_annulus():
    h = 0.02
    g = Grid.from_extent(-1.2, 1.2, -0.7, 0.7, h)
    rect = depth_field(rectangle_mask(g, -1.0, 1.0, -0.5, 0.5))
    assert rect.d_max == pytest.approx(0.5, abs=2 * h)
    g = Grid.from_extent(-1.2, 1.2, -1.2, 1.2, h)
    X, Y = g.mesh()
    r = np.hypot(X, Y)
    ann = DomainMask(g, (r >= 0.4) & (r <= 1.0))
    assert depth_field(ann).d_max == pytest.approx(0.3, abs=2 * h)


def test_boundary_phi0_sign_and_box(disc04):
    om, phi0 = disc04["omega"], disc04["phi0"]
    ix0, ix1, iy0, iy1 = computational_box(om)
    assert phi0.grid.shape == (iy1 - iy0, ix1 - ix0)
    inside = om.inside[iy0:iy1, ix0:ix1]
    assert np.all(phi0.values[inside] >= -1e-12)
    assert np.all(phi0.values[~inside] <= 1e-12)


def test_phi_snapshots(tmp_path):
    h = 0.1
    phi = circle_phi(h)
    params = SolverParams(record_dt=0.25, dump_dir=str(tmp_path), t_max=0.6)
    evolve_arrival_times(phi, np.ones(phi.grid.shape), params)
    names = sorted(os.listdir(tmp_path))
    assert {"phi_t0.asc", "phi_t0.25.asc", "phi_t0.5.asc"} <= set(names)


def test_upwind1_scheme_runs(disc04):
    om, phi0 = disc04["omega"], disc04["phi0"]
    T = solve_from_boundary(om, np.ones(om.grid.shape), SolverParams(scheme="upwind1"), phi0).T.values
    r = disc04["r"]
    sel = om.inside & (r < 0.9)
    assert np.max(np.abs(T[sel] - (1 - r[sel]))) <= 3 * 0.04
