"""Level-set evolution ``phi_t + v|grad phi| = 0`` and arrival-time extraction.

Second-order ENO one-sided differences feed a Godunov numerical Hamiltonian;
time stepping is the two-stage TVD Runge-Kutta (Heun) scheme. ``phi`` is
positive inside the front, so with ``v >= 0`` the front only moves inward.
"""

from __future__ import annotations

import logging
import math
import os
from dataclasses import dataclass

import numpy as np

from . import kernels
from ._kernels_py import eno2_minus_plus
from .grid import DomainMask, Grid, GridError, ScalarField, marching_squares, signed_distance

logger = logging.getLogger(__name__)

BOX_MARGIN = 4
SCHEMES = {"eno2": 2, "upwind1": 1}


class FrontVanished(RuntimeError):
    pass


@dataclass(frozen=True)
class SolverParams:
    cfl: float = 0.5
    redistance_interval: int = 20
    t_max: float | None = None
    record_dt: float | None = None
    dump_dir: str | None = None
    check_monotone: bool = False
    scheme: str = "eno2"  # or "upwind1": first-order, monotone

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"scheme must be one of {sorted(SCHEMES)}")
        if not 0 < self.cfl <= 1:
            raise ValueError("cfl must be in (0, 1]")
        if self.redistance_interval < 1:
            raise ValueError("redistance_interval must be >= 1")
        if self.t_max is not None and not self.t_max > 0:
            raise ValueError("t_max must be positive")


@dataclass(frozen=True, eq=False)
class LevelSetState:
    phi: ScalarField
    t: float = 0.0


@dataclass(frozen=True, eq=False)
class NormalSpeed:
    vtilde: ScalarField

    def __post_init__(self):
        v = self.vtilde.values
        if not np.all(np.isfinite(v)) or np.any(v < 0):
            raise ValueError("normal speed must be finite and non-negative")


@dataclass(frozen=True, eq=False)
class ArrivalTimeField:
    T: ScalarField
    unreached_mask: np.ndarray
    steps: int = 0
    t_final: float = 0.0

    @property
    def grid(self):
        return self.T.grid

    @property
    def d_max(self):
        """Largest reached arrival time (the depth maximum for unit speed)."""
        vals = self.T.values[~self.T.nodata_mask]
        return float(vals.max()) if vals.size else 0.0


def _speed_values(vtilde):
    if isinstance(vtilde, NormalSpeed):
        return vtilde.vtilde.values
    if isinstance(vtilde, ScalarField):
        return vtilde.values
    return np.asarray(vtilde, dtype=np.float64)


def eno2_derivatives(phi, axis):
    """``(minus, plus)`` one-sided ENO2 derivatives of ``phi`` along ``"x"`` or ``"y"``."""
    ax = {"x": 1, "y": 0}[axis]
    if phi.values.shape[ax] < 5:
        raise GridError("ENO2 needs at least 5 nodes along the differentiated axis")
    m, p = eno2_minus_plus(phi.values, phi.grid.cellsize, ax)
    return phi.with_values(m), phi.with_values(p)


def godunov_hamiltonian(vtilde, pxm, pxp, pym, pyp):
    """Godunov flux for ``H = v|p|``, resolved explicitly (works on arrays too)."""
    gx = np.maximum(np.maximum(pxm, 0.0) ** 2, np.minimum(pxp, 0.0) ** 2)
    gy = np.maximum(np.maximum(pym, 0.0) ** 2, np.minimum(pyp, 0.0) ** 2)
    out = vtilde * np.sqrt(gx + gy)
    return float(out) if np.ndim(out) == 0 else out


def cfl_timestep(vtilde, cellsize, cfl=0.5):
    vmax = float(np.max(_speed_values(vtilde)))
    if not vmax > 0:
        raise ValueError("normal speed is zero everywhere; the front cannot move")
    return cfl * cellsize / (2.0 * vmax)


def _hamiltonian(phi, v, h, order=2):
    return kernels.godunov_hamiltonian_field(np.ascontiguousarray(phi), v, h, order)


def _rk2(phi, v, h, dt, order=2):
    phi1 = phi - dt * _hamiltonian(phi, v, h, order)
    return 0.5 * phi + 0.5 * (phi1 - dt * _hamiltonian(phi1, v, h, order))


def rk2_step(state, vtilde, dt, scheme="eno2"):
    v = np.ascontiguousarray(_speed_values(vtilde), dtype=np.float64)
    phi = _rk2(state.phi.values, v, state.phi.grid.cellsize, dt, SCHEMES[scheme])
    return LevelSetState(state.phi.with_values(phi), state.t + dt)


def _redistance_values(grid, phi):
    field = ScalarField(grid, phi)
    contours = marching_squares(field, 0.0)
    if not contours:
        raise FrontVanished("front vanished: phi does not change sign")
    segs = np.vstack([c.segments() for c in contours])
    d = kernels.segment_distance(grid.xs, grid.ys, segs)
    return np.where(phi >= 0.0, d, -d)


def redistance(state):
    """Replace ``phi`` by the exact signed distance to its current zero contour."""
    phi = state.phi.values
    if not (np.any(phi > 0) and np.any(phi < 0)):
        raise FrontVanished("front vanished: phi does not change sign")
    return LevelSetState(state.phi.with_values(_redistance_values(state.phi.grid, phi)), state.t)


def evolve(state, vtilde, t_end, params=SolverParams(), speed_bound=None):
    """Advance ``state`` to exactly ``t_end`` (the last step is shortened)."""
    grid = state.phi.grid
    h = grid.cellsize
    v = np.ascontiguousarray(_speed_values(vtilde), dtype=np.float64)
    dt = params.cfl * h / (2.0 * speed_bound) if speed_bound else cfl_timestep(v, h, params.cfl)
    phi = np.array(state.phi.values)
    t = state.t
    steps = 0
    while t < t_end - 1e-12 * max(1.0, t_end):
        step = min(dt, t_end - t)
        phi = _rk2(phi, v, h, step, SCHEMES[params.scheme])
        t += step
        steps += 1
        if steps % params.redistance_interval == 0:
            phi = _redistance_values(grid, phi)
    return LevelSetState(ScalarField(grid, phi), t)


def evolve_arrival_times(phi0, vtilde, params=SolverParams(), active=None, speed_bound=None):
    """Evolve ``phi0`` and record, per node, the first time ``phi`` reaches zero.

    The crossing time is interpolated linearly between the last positive and
    first non-positive value. ``active`` selects the nodes whose arrival is
    awaited (default: where ``phi0 > 0``). ``speed_bound`` fixes the time step
    independently of ``vtilde`` (any bound >= max(vtilde) keeps the CFL limit).
    """
    grid = phi0.grid
    h = grid.cellsize
    v = np.ascontiguousarray(_speed_values(vtilde), dtype=np.float64)
    if v.shape != grid.shape:
        raise GridError("speed and phi0 are not on the same grid")
    bound = float(speed_bound) if speed_bound else float(v.max())
    if not bound > 0:
        raise ValueError("normal speed is zero everywhere; the front cannot move")
    dt = params.cfl * h / (2.0 * bound)
    order = SCHEMES[params.scheme]

    phi = np.array(phi0.values, dtype=np.float64)
    if active is None:
        active = phi > 0
    active = np.asarray(active, dtype=bool)

    T = np.full(grid.shape, np.nan)
    T[phi <= 0] = 0.0
    pending = active & np.isnan(T)
    remaining = int(pending.sum())

    t_max = params.t_max
    if t_max is None:
        pos = v[v > 0]
        diag = math.hypot(grid.nx - 1, grid.ny - 1) * h
        t_max = diag / float(pos.min())

    next_record = 0.0 if params.record_dt else None
    t = 0.0
    steps = 0
    while remaining > 0 and t < t_max:
        if next_record is not None and t >= next_record - 1e-12:
            _dump(params.dump_dir, grid, phi, t)
            next_record += params.record_dt
        step = min(dt, t_max - t)
        new = _rk2(phi, v, h, step, order)
        if params.check_monotone:
            gained = (new >= 0) & ~(phi >= 0)
            if gained.any():
                raise AssertionError(f"front gained {int(gained.sum())} nodes at t={t + step}")
        crossed = pending & (new <= 0)
        if crossed.any():
            a = phi[crossed]
            b = new[crossed]
            # a > 0 >= b on a pending node unless phi drifted non-positive before
            frac = np.where(a > 0, a / np.where(a - b > 0, a - b, 1.0), 0.0)
            T[crossed] = t + step * np.clip(frac, 0.0, 1.0)
            pending &= ~crossed
            remaining = int(pending.sum())
        phi = new
        t += step
        steps += 1
        if steps % params.redistance_interval == 0 and remaining > 0:
            if not np.any(phi > 0):
                break
            phi = _redistance_values(grid, phi)

    logger.debug("arrival solve: %d steps, t=%.4g, %d unreached", steps, t, remaining)
    unreached = active & np.isnan(T)
    return ArrivalTimeField(ScalarField(grid, T), unreached, steps, t)


def _dump(dump_dir, grid, phi, t):
    if not dump_dir:
        return
    from .terrain import write_esri_ascii

    os.makedirs(dump_dir, exist_ok=True)
    with open(os.path.join(dump_dir, f"phi_t{t:.6g}.asc"), "w") as fh:
        fh.write(write_esri_ascii(ScalarField(grid, phi)))


# ------------------------------------------------------- region helpers

def computational_box(mask, margin=BOX_MARGIN):
    """Node index window ``(ix0, ix1, iy0, iy1)`` (half-open) around the mask."""
    ix0, ix1, iy0, iy1 = mask.bbox()
    g = mask.grid
    return (max(ix0 - margin, 0), min(ix1 + margin + 1, g.nx),
            max(iy0 - margin, 0), min(iy1 + margin + 1, g.ny))


def crop(values, box):
    ix0, ix1, iy0, iy1 = box
    return np.ascontiguousarray(np.asarray(values)[iy0:iy1, ix0:ix1])


def box_offset(full_grid, sub_grid):
    h = full_grid.cellsize
    ix0 = int(round((sub_grid.origin[0] - full_grid.origin[0]) / h))
    iy0 = int(round((sub_grid.origin[1] - full_grid.origin[1]) / h))
    return ix0, ix0 + sub_grid.nx, iy0, iy0 + sub_grid.ny


def boundary_phi0(mask, margin=BOX_MARGIN):
    """Signed distance to the region outline on the mask's computational box,
    positive inside."""
    mask.validate()
    box = computational_box(mask, margin)
    sub = mask.grid.subgrid(*box)
    outline = mask.outline()
    inside_sub = crop(mask.inside, box)
    # reference point: an inside node, chosen farthest from the outline
    from .grid import unsigned_distance

    d = unsigned_distance(sub, outline)
    iy, ix = np.unravel_index(np.argmax(np.where(inside_sub, d, -1.0)), d.shape)
    return signed_distance(sub, outline, sub.node_xy(ix, iy))


def paste(full_grid, sub_field, fill=np.nan):
    box = box_offset(full_grid, sub_field.grid)
    out = np.full(full_grid.shape, fill)
    out[box[2]:box[3], box[0]:box[1]] = sub_field.values
    return out


def solve_from_boundary(mask, vtilde, params=SolverParams(), phi0=None, speed_bound=None):
    """Arrival times from the boundary of ``mask`` under normal speed ``vtilde``
    (given on the full grid). Returns a full-grid field; nodes outside the
    computational box are nodata."""
    if phi0 is None:
        phi0 = boundary_phi0(mask)
    full = mask.grid
    box = box_offset(full, phi0.grid)
    v = crop(_speed_values(vtilde), box)
    active = crop(mask.inside, box)
    res = evolve_arrival_times(phi0, v, params, active=active, speed_bound=speed_bound)
    T = paste(full, res.T)
    unreached = np.zeros(full.shape, dtype=bool)
    unreached[box[2]:box[3], box[0]:box[1]] = res.unreached_mask
    return ArrivalTimeField(ScalarField(full, T), unreached, res.steps, res.t_final)


def depth_field(mask, params=SolverParams(), phi0=None):
    """Unit-speed arrival time from the region boundary: the depth ``d``."""
    v = np.ones(mask.grid.shape)
    res = solve_from_boundary(mask, v, params, phi0=phi0)
    T = np.where(mask.inside, res.T.values, np.nan)
    return ArrivalTimeField(ScalarField(mask.grid, T), res.unreached_mask, res.steps, res.t_final)
