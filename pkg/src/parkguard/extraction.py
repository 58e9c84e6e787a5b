"""Expected cost, profit, exit paths and pristine-region classification.

The cost of extracting at x is the arrival time of a front started on the
region boundary and moving with normal speed ``1 / (1/v + alpha*psi*B)``,
where B is the benefit at x. Because B enters the speed, one front is solved
per benefit level and the per-node cost is interpolated between levels.
"""

from __future__ import annotations

import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .grid import (
    DomainMask,
    GridError,
    Polyline,
    ScalarField,
    bilinear_sample,
    gradient_central,
    integrate,
)
from .hj_solver import (
    ArrivalTimeField,
    SolverParams,
    boundary_phi0,
    box_offset,
    crop,
    solve_from_boundary,
)
from .rng import XorShift64Star

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class BenefitField:
    B: ScalarField
    B_min: float
    B_max: float

    @classmethod
    def from_field(cls, B, omega=None):
        if omega is not None:
            B = B.masked(omega)
        vals = B.values[~B.nodata_mask]
        if vals.size == 0:
            raise GridError("benefit field is empty")
        if np.any(vals < 0):
            raise ValueError("benefit must be non-negative on the region")
        return cls(B, float(vals.min()), float(vals.max()))

    @property
    def omega(self):
        return DomainMask(self.B.grid, ~self.B.nodata_mask)


@dataclass(frozen=True, eq=False)
class CostField:
    C: ScalarField
    per_level_T: list
    unreached_mask: np.ndarray


@dataclass(frozen=True, eq=False)
class ProfitField:
    P: ScalarField
    P_max: float
    argmax: tuple


@dataclass(frozen=True)
class RiskParams:
    alpha: float = 1.0
    epsilon: float = 0.05
    n_levels: int = 17
    tube_radius: float | None = None  # default 2 * cellsize
    n_paths: int = 200
    rng_seed: int = 0
    path_step: float | None = None  # default cellsize / 2

    def __post_init__(self):
        if self.alpha < 0:
            raise ValueError("alpha must be non-negative")
        if not 0 < self.epsilon <= 1:
            raise ValueError("epsilon must be in (0, 1]")
        if self.n_levels < 2:
            raise ValueError("n_levels must be >= 2")
        if self.tube_radius is not None and not self.tube_radius > 0:
            raise ValueError("tube_radius must be positive")
        if self.n_paths < 0:
            raise ValueError("n_paths must be non-negative")


@dataclass(frozen=True, eq=False)
class ExitPath(Polyline):
    stalled: bool = False


@dataclass(eq=False)
class ExtractionOutcome:
    profit: ProfitField
    high_profit_mask: DomainMask
    paths: list
    pristine_mask: DomainMask
    pristine_proportion: float
    value_protected: float
    cost: CostField = None
    benefit: BenefitField = None
    psi: ScalarField = None
    omega: DomainMask = None
    profitable: bool = True
    solver_steps: list = field(default_factory=list)

    def metrics(self):
        p = self.profit
        return {
            "p_max": p.P_max,
            "pristine_proportion": self.pristine_proportion,
            "value_protected": self.value_protected,
            "n_paths": len(self.paths),
            "argmax_x": p.argmax[0],
            "argmax_y": p.argmax[1],
        }


# ------------------------------------------------------------- benefit

def benefit_from_depth(depth, k):
    """``B(d) = k d (2 d_m - d) / d_m``: zero on the boundary, ``k d_m`` at the deepest point."""
    if not k > 0:
        raise ValueError("k must be positive")
    d_m = depth.d_max
    if not d_m > 0:
        raise ValueError("depth field has no positive depth")
    d = depth.T.values
    B = np.where(depth.T.nodata_mask, np.nan, k * d * (2.0 * d_m - d) / d_m)
    return BenefitField.from_field(ScalarField(depth.grid, B, depth.T.nodata_mask))


def benefit_levels(benefit, n):
    return np.linspace(benefit.B_min, benefit.B_max, n)


# ---------------------------------------------------------------- cost

def normal_speed(speed, psi, alpha, B_i):
    """``1 / (1/v + alpha*psi*B_i)`` evaluated node-wise."""
    v = speed.v.values if hasattr(speed, "v") else np.asarray(speed)
    p = psi.values if isinstance(psi, ScalarField) else np.asarray(psi)
    return 1.0 / (1.0 / v + (alpha * p) * B_i)


def cost_for_benefit_level(speed, patrol, alpha, B_i, boundary_phi0, params=SolverParams(), omega=None):
    """Arrival-time field for an extractor carrying benefit ``B_i``.

    The time step comes from the patrol-free speed bound ``max(v)`` over the
    computational box, so every level and every patrol share one time grid.
    """
    if B_i < 0 or alpha < 0:
        raise ValueError("B_i and alpha must be non-negative")
    full = speed.v.grid
    box = box_offset(full, boundary_phi0.grid)
    vt = normal_speed(speed, patrol.psi, alpha, B_i)
    bound = float(crop(speed.v.values, box).max())
    if omega is None:
        inside = np.zeros(full.shape, dtype=bool)
        inside[box[2]:box[3], box[0]:box[1]] = boundary_phi0.values > 0
        omega = DomainMask(full, inside)
    return solve_from_boundary(omega, vt, params, phi0=boundary_phi0, speed_bound=bound)


def _bracket(levels, b):
    """Index ``i`` and weight ``w`` with ``b = (1-w) B_i + w B_{i+1}``."""
    Bs = np.asarray(levels, dtype=np.float64)
    i = np.clip(np.searchsorted(Bs, b, side="right") - 1, 0, len(Bs) - 2)
    w = (b - Bs[i]) / (Bs[i + 1] - Bs[i])
    return i, w


def _lerp(Ta, Tb, w):
    # exact at knots: w == 0 returns Ta, w == 1 returns Tb even if the other is NaN
    out = (1.0 - w) * Ta + w * Tb
    out = np.where(w == 0.0, Ta, out)
    return np.where(w == 1.0, Tb, out)


def assemble_cost(levels, B):
    """Per-node cost from per-level arrival fields, linear in benefit between knots."""
    levels = sorted(levels, key=lambda lv: lv[0])
    if len(levels) < 2:
        raise ValueError("need at least two benefit levels")
    Bs = np.array([lv[0] for lv in levels])
    if np.any(np.diff(Bs) <= 0):
        raise ValueError("benefit levels must be strictly increasing")
    inside = ~B.B.nodata_mask
    b = B.B.values[inside]
    if b.min() < Bs[0] or b.max() > Bs[-1]:
        raise ValueError(
            f"benefit range [{b.min():.6g}, {b.max():.6g}] not covered by levels "
            f"[{Bs[0]:.6g}, {Bs[-1]:.6g}]")
    i, w = _bracket(Bs, b)
    Tstack = np.stack([lv[1].T.values[inside] for lv in levels])
    n = np.arange(len(b))
    Ta, Tb = Tstack[i, n], Tstack[i + 1, n]
    c = _lerp(Ta, Tb, w)
    C = np.full(B.B.grid.shape, np.nan)
    C[inside] = c
    unreached = np.zeros(B.B.grid.shape, dtype=bool)
    unreached[inside] = ~np.isfinite(c)
    return CostField(ScalarField(B.B.grid, C), list(levels), unreached)


def level_cost(cost, b):
    """Cost field ``C_b`` for an extractor carrying benefit ``b``, on the full grid."""
    Bs = [lv[0] for lv in cost.per_level_T]
    i, w = _bracket(Bs, b)
    i = int(i)
    Ta = cost.per_level_T[i][1].T.values
    Tb = cost.per_level_T[i + 1][1].T.values
    return ScalarField(cost.C.grid, _lerp(Ta, Tb, float(w)))


# -------------------------------------------------------------- profit

def profit(B, C):
    if B.B.grid != C.C.grid:
        raise GridError("benefit and cost grids differ")
    P = B.B.values - C.C.values
    ok = np.isfinite(P) & ~B.B.nodata_mask
    if not ok.any():
        raise ValueError("no reached nodes in the region")
    Pm = np.where(ok, P, -np.inf)
    k = int(np.argmax(Pm))
    iy, ix = np.unravel_index(k, P.shape)
    field_ = ScalarField(B.B.grid, np.where(ok, P, np.nan), ~ok)
    return ProfitField(field_, float(Pm.flat[k]), B.B.grid.node_xy(ix, iy))


def high_profit_region(P, epsilon):
    """``({P >= (1 - eps) P_max}, profitable)``; empty when ``P_max <= 0``."""
    grid = P.P.grid
    if not P.P_max > 0:
        return DomainMask(grid, np.zeros(grid.shape, dtype=bool)), False
    thr = (1.0 - epsilon) * P.P_max
    vals = np.where(P.P.nodata_mask, -np.inf, P.P.values)
    return DomainMask(grid, vals >= thr), True


# --------------------------------------------------------------- paths

class _LevelGradients:
    """Per-level arrival fields with their central-difference gradients."""

    def __init__(self, cost):
        self.cost = cost
        self.Bs = np.array([lv[0] for lv in cost.per_level_T])
        self.fields = []
        for _, at in cost.per_level_T:
            gx, gy = gradient_central(at.T)
            self.fields.append((at.T, gx, gy))

    def for_benefit(self, b):
        i, w = _bracket(self.Bs, b)
        i, w = int(i), float(w)
        return self.fields[i], self.fields[i + 1], w


def _sample(triple_a, triple_b, w, p):
    out = []
    for fa, fb in zip(triple_a, triple_b):
        if w == 0.0:
            out.append(bilinear_sample(fa, p))
        elif w == 1.0:
            out.append(bilinear_sample(fb, p))
        else:
            out.append((1.0 - w) * bilinear_sample(fa, p) + w * bilinear_sample(fb, p))
    return out


def trace_exit_path(x0, cost, B, step=None, omega=None, max_steps=None, _grads=None):
    """Steepest descent on ``C_{B(x0)}`` from ``x0`` until the region is left.

    Steps have fixed length ``step`` (halved up to six times if the cost
    fails to drop). Tracing stops when the nearest node lies outside the
    region, or when the cost falls below two cells' worth of its own slope.
    A path that stops on a vanishing gradient or without descent is
    returned with ``stalled=True``.
    """
    grid = cost.C.grid
    h = grid.cellsize
    step = h / 2 if step is None else step
    if step > h:
        raise ValueError("step must not exceed the cell size")
    omega = B.omega if omega is None else omega
    if max_steps is None:
        max_steps = int(10 * omega.perimeter() / step) + 1
    grads = _grads or _LevelGradients(cost)
    b0 = _benefit_at(B, x0) if _inside(omega, x0) else B.B_min
    ta, tb, w = grads.for_benefit(b0)

    p = np.array(x0, dtype=np.float64)
    verts = [p.copy()]
    stalled = False
    exited = False
    if not _inside(omega, p):
        return ExitPath(np.vstack([p, p + [step * 1e-3, 0.0]]), False)
    try:
        c, gx, gy = _sample(ta, tb, w, p)
    except GridError:
        # within a stencil of the edge: already on the way out
        return ExitPath(np.vstack([p, p + [step * 1e-3, 0.0]]), False)
    for _ in range(max_steps):
        g = math.hypot(gx, gy)
        if g < 1e-9:
            stalled = True
            break
        if c < 2.0 * h * g:
            break
        s = step
        moved = False
        for _halve in range(7):
            q = p - s * np.array([gx, gy]) / g
            if not grid.contains(q):
                break
            if not _inside(omega, q):
                verts.append(q)
                p = q
                moved = True
                break
            try:
                cq, gxq, gyq = _sample(ta, tb, w, q)
            except GridError:
                # stencil reaches past the edge, so q is one cell from leaving
                verts.append(q)
                p = q
                exited = True
                moved = True
                break
            if cq < c:
                verts.append(q)
                p, c, gx, gy = q, cq, gxq, gyq
                moved = True
                break
            s *= 0.5
        if not moved:
            stalled = True
            break
        if exited or not _inside(omega, p):
            break
    if len(verts) < 2:
        verts.append(verts[0] + [step * 1e-3, 0.0])
    return ExitPath(np.vstack(verts), False, stalled)


def _benefit_at(B, p):
    try:
        return bilinear_sample(B.B, p)
    except GridError:
        ix, iy = B.B.grid.nearest_node(p)
        return float(B.B.values[iy, ix])


def _inside(omega, p):
    g = omega.grid
    ix, iy = g.nearest_node(p)
    if not (0 <= ix < g.nx and 0 <= iy < g.ny):
        return False
    return bool(omega.inside[iy, ix])


def seed_extraction_points(hp_mask, n, seed):
    """``n`` points uniform over the high-profit cells, jittered within each cell."""
    if n <= 0:
        raise ValueError("n must be positive")
    iy, ix = np.nonzero(hp_mask.inside)
    if len(ix) == 0:
        raise ValueError("high-profit region is empty")
    rng = XorShift64Star(seed)
    g = hp_mask.grid
    h = g.cellsize
    pts = []
    for _ in range(n):
        k = rng.randbelow(len(ix))
        x, y = g.node_xy(int(ix[k]), int(iy[k]))
        pts.append((x + (rng.random() - 0.5) * h, y + (rng.random() - 0.5) * h))
    return pts


def classify_pristine(hp_mask, paths, tube_radius, omega):
    """Pristine = region minus high-profit nodes minus nodes within ``tube_radius`` of a path."""
    if not tube_radius > 0:
        raise ValueError("tube_radius must be positive")
    grid = omega.grid
    h = grid.cellsize
    touched = hp_mask.inside.copy()
    segs = [pl.segments() for pl in paths]
    if segs:
        segs = np.vstack(segs)
        x0, y0 = grid.origin
        r = int(math.ceil(tube_radius / h)) + 1
        off = np.arange(-r, r + 1)
        oy, ox = np.meshgrid(off, off, indexing="ij")
        oy, ox = oy.ravel(), ox.ravel()
        for s in range(0, len(segs), 4096):
            chunk = segs[s:s + 4096]
            mx = 0.5 * (chunk[:, 0] + chunk[:, 2])
            my = 0.5 * (chunk[:, 1] + chunk[:, 3])
            half = 0.5 * np.hypot(chunk[:, 2] - chunk[:, 0], chunk[:, 3] - chunk[:, 1])
            extra = int(math.ceil(half.max() / h)) if len(half) else 0
            if extra:
                o2 = np.arange(-(r + extra), r + extra + 1)
                qy, qx = np.meshgrid(o2, o2, indexing="ij")
                qy, qx = qy.ravel(), qx.ravel()
            else:
                qy, qx = oy, ox
            cx = np.rint((mx - x0) / h).astype(int)
            cy = np.rint((my - y0) / h).astype(int)
            ix = cx[:, None] + qx[None, :]
            iy = cy[:, None] + qy[None, :]
            valid = (ix >= 0) & (ix < grid.nx) & (iy >= 0) & (iy < grid.ny)
            px = x0 + ix * h
            py = y0 + iy * h
            ax, ay = chunk[:, 0:1], chunk[:, 1:2]
            dx, dy = chunk[:, 2:3] - ax, chunk[:, 3:4] - ay
            L2 = dx * dx + dy * dy
            with np.errstate(invalid="ignore", divide="ignore"):
                t = np.where(L2 > 0, np.clip(((px - ax) * dx + (py - ay) * dy) / L2, 0, 1), 0)
            d = np.hypot(ax + t * dx - px, ay + t * dy - py)
            hit = valid & (d <= tube_radius)
            touched[iy[hit], ix[hit]] = True
    pristine = omega.inside & ~touched
    return DomainMask(grid, pristine)


def metrics(pristine, B, omega):
    """``(pristine proportion, proportion of value protected)`` over the region."""
    if np.any(pristine.inside & ~omega.inside):
        raise ValueError("pristine mask extends outside the region")
    chi = ScalarField(omega.grid, pristine.inside.astype(np.float64))
    one = ScalarField(omega.grid, np.ones(omega.grid.shape))
    pp = integrate(chi, omega) / integrate(one, omega)
    Bv = np.where(omega.inside, np.nan_to_num(B.B.values), 0.0)
    total = integrate(ScalarField(omega.grid, Bv), omega)
    vp = integrate(ScalarField(omega.grid, Bv * chi.values), omega) / total if total > 0 else pp
    return float(pp), float(vp)


# ---------------------------------------------------------- the pipeline

def _threads():
    env = os.environ.get("PARKGUARD_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def solve_levels(speed, patrol, alpha, Bs, phi0, solver, omega):
    def one(b):
        return (float(b), cost_for_benefit_level(speed, patrol, alpha, float(b), phi0, solver, omega))

    n = _threads()
    if n <= 1 or len(Bs) <= 1:
        return [one(b) for b in Bs]
    with ThreadPoolExecutor(max_workers=n) as ex:
        return list(ex.map(one, Bs))


def run_extraction(speed, omega, patrol, benefit, risk=RiskParams(), solver=SolverParams(), phi0=None):
    """Full pipeline: level solves, cost, profit, high-profit region, exit paths,
    pristine classification and metrics."""
    omega.validate()
    grid = omega.grid
    h = grid.cellsize
    if phi0 is None:
        phi0 = boundary_phi0(omega)
    Bs = benefit_levels(benefit, risk.n_levels)
    levels = solve_levels(speed, patrol, risk.alpha, Bs, phi0, solver, omega)
    cost = assemble_cost(levels, benefit)
    prof = profit(benefit, cost)
    hp, profitable = high_profit_region(prof, risk.epsilon)
    steps = [lv[1].steps for lv in levels]
    common = dict(cost=cost, benefit=benefit, psi=patrol.psi, omega=omega, solver_steps=steps)

    if not profitable:
        logger.info("no profitable extraction: P_max=%.4g", prof.P_max)
        return ExtractionOutcome(prof, hp, [], DomainMask(grid, omega.inside), 1.0, 1.0,
                                 profitable=False, **common)

    tube = risk.tube_radius if risk.tube_radius is not None else 2.0 * h
    step = risk.path_step if risk.path_step is not None else 0.5 * h
    paths = []
    if risk.n_paths > 0:
        grads = _LevelGradients(cost)
        max_steps = int(10 * omega.perimeter() / step) + 1
        for x0 in seed_extraction_points(hp, risk.n_paths, risk.rng_seed):
            paths.append(trace_exit_path(x0, cost, benefit, step, omega, max_steps, _grads=grads))
    pristine = classify_pristine(hp, paths, tube, omega)
    pp, vp = metrics(pristine, benefit, omega)
    return ExtractionOutcome(prof, hp, paths, pristine, pp, vp, **common)
