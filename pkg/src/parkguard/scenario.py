"""Declarative scenarios: JSON config parsing, the end-to-end runner and
the analytic unit-disc validation harness.

Config layout (``schema: 1``)::

    {
      "schema": 1,
      "terrain": {"kind": "esri", "path": "dem.asc"}
               | {"kind": "synthetic", "terrain": "flat|ramp|ridge|crater",
                  "grid": {"xmin", "xmax", "ymin", "ymax", "cellsize"}, "params": {...}},
      "mask":    {"kind": "nodata"} | {"kind": "esri", "path"} | {"kind": "polygon_csv", "path"}
               | {"kind": "polygon", "vertices"} | {"kind": "disc", "center", "radius"}
               | {"kind": "rectangle", "xmin", "xmax", "ymin", "ymax"},
      "speed":   {"kind": "walking", "overrides": null} | {"kind": "constant", "value"},
      "benefit": {"kind": "depth_poly", "k"} | {"kind": "depth_linear", "k"} | {"kind": "raster", "path"},
      "patrol":  {"kind": "none"} | {"kind": "homogeneous", "E"} | {"kind": "band", "E", "lo", "hi"}
               | {"kind": "raster", "path", "E"},
      "risk":    {"alpha", "epsilon", "n_levels", "tube_radius", "n_paths", "rng_seed", "path_step"},
      "solver":  {"cfl", "redistance_interval", "t_max", "v_min", "scheme"},
      "output":  "out"
    }

Relative paths resolve against the directory holding the config file.
"""

from __future__ import annotations

import copy
import json
import math
import os
import time
from dataclasses import dataclass, field

import numpy as np

from . import __version__, kernels
from . import patrol as patrols
from .extraction import (
    BenefitField,
    RiskParams,
    assemble_cost,
    benefit_from_depth,
    profit,
    run_extraction,
    solve_levels,
)
from .grid import DomainMask, Grid, ScalarField, read_polylines_csv, write_polylines_csv
from .hj_solver import SCHEMES, SolverParams, boundary_phi0, depth_field
from .terrain import (
    SYNTHETIC_KINDS,
    ElevationModel,
    SpeedField,
    disc_mask,
    load_esri_ascii,
    nodata_mask,
    polygon_mask,
    rectangle_mask,
    speed_field,
    synthetic_elevation,
    write_esri_ascii,
    write_mask_ascii,
)

SCHEMA_VERSION = 1


class ConfigError(ValueError):
    """Invalid scenario config; ``pointer`` locates the offending value."""

    def __init__(self, pointer, message):
        self.pointer = pointer or "/"
        super().__init__(f"{self.pointer}: {message}")


_REQUIRED = object()


def _is_num(x):
    return isinstance(x, (int, float)) and not isinstance(x, bool) and math.isfinite(x)


def _check_keys(obj, allowed, ptr):
    if not isinstance(obj, dict):
        raise ConfigError(ptr, "expected an object")
    for k in obj:
        if k not in allowed:
            raise ConfigError(f"{ptr}/{k}", "unknown key")


def _get(obj, key, ptr, default=_REQUIRED):
    if key in obj:
        return obj[key]
    if default is _REQUIRED:
        raise ConfigError(f"{ptr}/{key}", "missing required key")
    return default


def _num(obj, key, ptr, default=_REQUIRED, check=None, why="", nullable=False):
    v = _get(obj, key, ptr, default)
    if v is None and nullable:
        return None
    if not _is_num(v):
        raise ConfigError(f"{ptr}/{key}", "expected a finite number")
    v = float(v)
    if check is not None and not check(v):
        raise ConfigError(f"{ptr}/{key}", why or "value out of range")
    return v


def _int(obj, key, ptr, default=_REQUIRED, check=None, why=""):
    v = _get(obj, key, ptr, default)
    if isinstance(v, bool) or not isinstance(v, (int, float)) or v != int(v):
        raise ConfigError(f"{ptr}/{key}", "expected an integer")
    v = int(v)
    if check is not None and not check(v):
        raise ConfigError(f"{ptr}/{key}", why or "value out of range")
    return v


def _str(obj, key, ptr, default=_REQUIRED, nullable=False):
    v = _get(obj, key, ptr, default)
    if v is None and nullable:
        return None
    if not isinstance(v, str) or not v:
        raise ConfigError(f"{ptr}/{key}", "expected a non-empty string")
    return v


def _as_point(v, ptr):
    if not (isinstance(v, (list, tuple)) and len(v) == 2 and all(_is_num(c) for c in v)):
        raise ConfigError(ptr, "expected [x, y]")
    return [float(v[0]), float(v[1])]


def _point(obj, key, ptr, default=_REQUIRED):
    return _as_point(_get(obj, key, ptr, default), f"{ptr}/{key}")


def _kind(obj, ptr, kinds, default=_REQUIRED):
    if not isinstance(obj, dict):
        raise ConfigError(ptr, "expected an object")
    k = _get(obj, "kind", ptr, default)
    if k not in kinds:
        raise ConfigError(f"{ptr}/kind", f"expected one of {sorted(kinds)}")
    return k


# ----------------------------------------------------------- sections

_SYN_PARAMS = {
    "flat": {},
    "ramp": {"slope": 0.1, "direction": 0.0},
    "ridge": {"height": 100.0, "sigma": 50.0, "x0": 0.0},
    "crater": {"rim_radius": 50.0, "rim_height": 30.0, "rim_width": 10.0, "center": [0.0, 0.0]},
}


def _terrain(obj, ptr):
    kind = _kind(obj, ptr, {"esri", "synthetic"})
    if kind == "esri":
        _check_keys(obj, {"kind", "path"}, ptr)
        return {"kind": kind, "path": _str(obj, "path", ptr)}
    _check_keys(obj, {"kind", "terrain", "grid", "params"}, ptr)
    name = _get(obj, "terrain", ptr)
    if name not in SYNTHETIC_KINDS:
        raise ConfigError(f"{ptr}/terrain", f"expected one of {list(SYNTHETIC_KINDS)}")
    g = _get(obj, "grid", ptr)
    gp = f"{ptr}/grid"
    _check_keys(g, {"xmin", "xmax", "ymin", "ymax", "cellsize"}, gp)
    grid = {k: _num(g, k, gp) for k in ("xmin", "xmax", "ymin", "ymax")}
    grid["cellsize"] = _num(g, "cellsize", gp, check=lambda v: v > 0, why="must be positive")
    if grid["xmax"] <= grid["xmin"] or grid["ymax"] <= grid["ymin"]:
        raise ConfigError(gp, "empty extent")
    params_in = _get(obj, "params", ptr, {})
    pp = f"{ptr}/params"
    _check_keys(params_in, set(_SYN_PARAMS[name]), pp)
    params = {}
    for k, d in _SYN_PARAMS[name].items():
        params[k] = _point(params_in, k, pp, d) if k == "center" else _num(params_in, k, pp, d)
    return {"kind": kind, "terrain": name, "grid": grid, "params": params}


def _mask(obj, ptr):
    kind = _kind(obj, ptr, {"nodata", "esri", "polygon_csv", "polygon", "disc", "rectangle"})
    if kind == "nodata":
        _check_keys(obj, {"kind"}, ptr)
        return {"kind": kind}
    if kind in ("esri", "polygon_csv"):
        _check_keys(obj, {"kind", "path"}, ptr)
        return {"kind": kind, "path": _str(obj, "path", ptr)}
    if kind == "polygon":
        _check_keys(obj, {"kind", "vertices"}, ptr)
        verts = _get(obj, "vertices", ptr)
        if not isinstance(verts, list) or len(verts) < 3:
            raise ConfigError(f"{ptr}/vertices", "expected at least 3 [x, y] vertices")
        pts = [_as_point(v, f"{ptr}/vertices/{i}") for i, v in enumerate(verts)]
        return {"kind": kind, "vertices": pts}
    if kind == "disc":
        _check_keys(obj, {"kind", "center", "radius"}, ptr)
        return {"kind": kind, "center": _point(obj, "center", ptr, [0.0, 0.0]),
                "radius": _num(obj, "radius", ptr, check=lambda v: v > 0, why="must be positive")}
    _check_keys(obj, {"kind", "xmin", "xmax", "ymin", "ymax"}, ptr)
    r = {k: _num(obj, k, ptr) for k in ("xmin", "xmax", "ymin", "ymax")}
    if r["xmax"] <= r["xmin"] or r["ymax"] <= r["ymin"]:
        raise ConfigError(ptr, "empty rectangle")
    return {"kind": kind, **r}


def _speed(obj, ptr):
    kind = _kind(obj, ptr, {"walking", "constant"}, "walking")
    if kind == "walking":
        _check_keys(obj, {"kind", "overrides"}, ptr)
        return {"kind": kind, "overrides": _str(obj, "overrides", ptr, None, nullable=True)}
    _check_keys(obj, {"kind", "value"}, ptr)
    return {"kind": kind, "value": _num(obj, "value", ptr, check=lambda v: v > 0, why="must be positive")}


def _benefit(obj, ptr):
    kind = _kind(obj, ptr, {"depth_poly", "depth_linear", "raster"})
    if kind == "raster":
        _check_keys(obj, {"kind", "path"}, ptr)
        return {"kind": kind, "path": _str(obj, "path", ptr)}
    _check_keys(obj, {"kind", "k"}, ptr)
    return {"kind": kind, "k": _num(obj, "k", ptr, check=lambda v: v > 0, why="must be positive")}


def _budget(obj, ptr):
    return _num(obj, "E", ptr, check=lambda v: v >= 0, why="must be non-negative")


def _patrol(obj, ptr):
    kind = _kind(obj, ptr, {"none", "homogeneous", "band", "raster"})
    if kind == "none":
        _check_keys(obj, {"kind"}, ptr)
        return {"kind": kind}
    if kind == "homogeneous":
        _check_keys(obj, {"kind", "E"}, ptr)
        return {"kind": kind, "E": _budget(obj, ptr)}
    if kind == "band":
        _check_keys(obj, {"kind", "E", "lo", "hi"}, ptr)
        lo = _num(obj, "lo", ptr, 0.3, check=lambda v: 0 <= v < 1, why="must be in [0, 1)")
        hi = _num(obj, "hi", ptr, 0.7, check=lambda v: lo < v <= 1, why="must be in (lo, 1]")
        return {"kind": kind, "E": _budget(obj, ptr), "lo": lo, "hi": hi}
    _check_keys(obj, {"kind", "path", "E"}, ptr)
    return {"kind": kind, "path": _str(obj, "path", ptr), "E": _budget(obj, ptr)}


def _risk(obj, ptr):
    _check_keys(obj, {"alpha", "epsilon", "n_levels", "tube_radius", "n_paths", "rng_seed", "path_step"}, ptr)
    pos = dict(check=lambda v: v > 0, why="must be positive", nullable=True)
    return RiskParams(
        alpha=_num(obj, "alpha", ptr, 1.0, check=lambda v: v >= 0, why="must be non-negative"),
        epsilon=_num(obj, "epsilon", ptr, 0.05, check=lambda v: 0 < v <= 1, why="must be in (0, 1]"),
        n_levels=_int(obj, "n_levels", ptr, 17, check=lambda v: v >= 2, why="must be >= 2"),
        tube_radius=_num(obj, "tube_radius", ptr, None, **pos),
        n_paths=_int(obj, "n_paths", ptr, 200, check=lambda v: v >= 0, why="must be non-negative"),
        rng_seed=_int(obj, "rng_seed", ptr, 0, check=lambda v: 0 <= v < 2 ** 64, why="must fit in 64 bits"),
        path_step=_num(obj, "path_step", ptr, None, **pos),
    )


def _solver(obj, ptr):
    _check_keys(obj, {"cfl", "redistance_interval", "t_max", "v_min", "scheme"}, ptr)
    scheme = _get(obj, "scheme", ptr, "eno2")
    if scheme not in SCHEMES:
        raise ConfigError(f"{ptr}/scheme", f"expected one of {sorted(SCHEMES)}")
    return {
        "scheme": scheme,
        "cfl": _num(obj, "cfl", ptr, 0.5, check=lambda v: 0 < v <= 1, why="must be in (0, 1]"),
        "redistance_interval": _int(obj, "redistance_interval", ptr, 20, check=lambda v: v >= 1,
                                    why="must be >= 1"),
        "t_max": _num(obj, "t_max", ptr, None, check=lambda v: v > 0, why="must be positive", nullable=True),
        "v_min": _num(obj, "v_min", ptr, 0.01, check=lambda v: v > 0, why="must be positive"),
    }


@dataclass
class ScenarioConfig:
    terrain: dict
    mask: dict
    speed: dict
    benefit: dict
    patrol: dict
    risk: RiskParams
    solver: dict
    output: str = "out"
    base_dir: str = field(default=".", compare=False)

    def solver_params(self):
        s = self.solver
        return SolverParams(cfl=s["cfl"], redistance_interval=s["redistance_interval"], t_max=s["t_max"],
                            scheme=s["scheme"])

    def resolve(self, path):
        return path if os.path.isabs(path) else os.path.join(self.base_dir, path)

    def to_dict(self):
        r = self.risk
        return {
            "schema": SCHEMA_VERSION,
            "terrain": copy.deepcopy(self.terrain),
            "mask": copy.deepcopy(self.mask),
            "speed": dict(self.speed),
            "benefit": dict(self.benefit),
            "patrol": dict(self.patrol),
            "risk": {"alpha": r.alpha, "epsilon": r.epsilon, "n_levels": r.n_levels,
                     "tube_radius": r.tube_radius, "n_paths": r.n_paths, "rng_seed": r.rng_seed,
                     "path_step": r.path_step},
            "solver": dict(self.solver),
            "output": self.output,
        }


_TOP = {"schema", "terrain", "mask", "speed", "benefit", "patrol", "risk", "solver", "output"}


def parse_config(text, base_dir="."):
    """Validate a JSON config (str, bytes or dict) and fill every default."""
    if isinstance(text, dict):
        obj = text
    else:
        if isinstance(text, bytes):
            text = text.decode("utf-8")
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError("/", f"invalid JSON: {exc}") from None
    _check_keys(obj, _TOP, "")
    schema = _get(obj, "schema", "", SCHEMA_VERSION)
    if schema != SCHEMA_VERSION:
        raise ConfigError("/schema", f"unsupported schema version {schema!r}")
    return ScenarioConfig(
        terrain=_terrain(_get(obj, "terrain", ""), "/terrain"),
        mask=_mask(_get(obj, "mask", ""), "/mask"),
        speed=_speed(_get(obj, "speed", "", {}), "/speed"),
        benefit=_benefit(_get(obj, "benefit", ""), "/benefit"),
        patrol=_patrol(_get(obj, "patrol", ""), "/patrol"),
        risk=_risk(_get(obj, "risk", "", {}), "/risk"),
        solver=_solver(_get(obj, "solver", "", {}), "/solver"),
        output=_str(obj, "output", "", "out"),
        base_dir=base_dir,
    )


def load_config(path):
    with open(path, "rb") as fh:
        return parse_config(fh.read(), base_dir=os.path.dirname(os.path.abspath(path)))


def serialize(cfg):
    return json.dumps(cfg.to_dict(), indent=2, sort_keys=True) + "\n"


# ------------------------------------------------------------- runner

def _read_text(path):
    with open(path) as fh:
        return fh.read()


def build_inputs(cfg):
    """Terrain, region mask and speed field described by ``cfg``."""
    t = cfg.terrain
    if t["kind"] == "esri":
        elev = load_esri_ascii(_read_text(cfg.resolve(t["path"])))
    else:
        g = t["grid"]
        grid = Grid.from_extent(g["xmin"], g["xmax"], g["ymin"], g["ymax"], g["cellsize"])
        elev = ScalarField(grid, synthetic_elevation(t["terrain"], grid, t["params"]))
    grid = elev.grid
    omega = _build_mask(cfg, grid, elev)
    omega.validate()
    v_min = cfg.solver["v_min"]
    if cfg.speed["kind"] == "constant":
        speed = SpeedField(ScalarField.constant(grid, cfg.speed["value"]), v_min)
    else:
        overrides = None
        if cfg.speed["overrides"]:
            overrides = load_esri_ascii(_read_text(cfg.resolve(cfg.speed["overrides"])))
        speed = speed_field(ElevationModel(elev, omega), v_min, overrides)
    return elev, omega, speed


def _build_mask(cfg, grid, elev):
    m = cfg.mask
    kind = m["kind"]
    if kind == "nodata":
        return nodata_mask(elev)
    if kind == "esri":
        f = load_esri_ascii(_read_text(cfg.resolve(m["path"])))
        if f.grid != grid:
            raise ValueError("mask raster is not co-registered with the terrain")
        return DomainMask(grid, np.where(f.nodata_mask, False, f.values != 0))
    if kind == "polygon_csv":
        lines = read_polylines_csv(_read_text(cfg.resolve(m["path"])))
        if len(lines) != 1:
            raise ValueError("polygon CSV must hold exactly one polygon")
        return polygon_mask(grid, lines[0].vertices)
    if kind == "polygon":
        return polygon_mask(grid, m["vertices"])
    if kind == "disc":
        return disc_mask(grid, tuple(m["center"]), m["radius"])
    return rectangle_mask(grid, m["xmin"], m["xmax"], m["ymin"], m["ymax"])


def build_benefit(cfg, omega, depth):
    b = cfg.benefit
    if b["kind"] == "depth_poly":
        return benefit_from_depth(depth, b["k"])
    if b["kind"] == "depth_linear":
        d = np.where(omega.inside, depth.T.values, np.nan)
        return BenefitField.from_field(ScalarField(omega.grid, b["k"] * d))
    f = load_esri_ascii(_read_text(cfg.resolve(b["path"])))
    if f.grid != omega.grid:
        raise ValueError("benefit raster is not co-registered with the terrain")
    if f.nodata_mask[omega.inside].any():
        raise ValueError("benefit raster has nodata inside the region")
    return BenefitField.from_field(f, omega)


def build_patrol(cfg, omega, depth):
    p = cfg.patrol
    if p["kind"] == "none":
        return patrols.none(omega)
    if p["kind"] == "homogeneous":
        return patrols.homogeneous(p["E"], omega)
    if p["kind"] == "band":
        return patrols.band(p["E"], depth, p["lo"], p["hi"], omega)
    shape = load_esri_ascii(_read_text(cfg.resolve(p["path"])))
    return patrols.from_raster(shape, p["E"], omega)


def run_scenario(cfg, out_dir=None):
    """Run the full pipeline and write every output file. Returns the outcome."""
    start = time.perf_counter()
    out_dir = out_dir or cfg.resolve(cfg.output)
    stage = "inputs"
    try:
        elev, omega, speed = build_inputs(cfg)
        stage = "depth"
        solver = cfg.solver_params()
        phi0 = boundary_phi0(omega)
        depth = depth_field(omega, solver, phi0)
        stage = "benefit"
        benefit = build_benefit(cfg, omega, depth)
        stage = "patrol"
        patrol = build_patrol(cfg, omega, depth)
        stage = "extraction"
        outcome = run_extraction(speed, omega, patrol, benefit, cfg.risk, solver, phi0=phi0)
    except Exception as exc:
        raise RuntimeError(f"scenario failed during {stage}: {exc}") from exc
    wall = time.perf_counter() - start
    write_outputs(outcome, out_dir)
    h = omega.grid.cellsize
    r = cfg.risk
    manifest = {
        "config": cfg.to_dict(),
        "resolved": {
            "tube_radius": r.tube_radius if r.tube_radius is not None else 2.0 * h,
            "path_step": r.path_step if r.path_step is not None else 0.5 * h,
            "benefit_levels": [lv[0] for lv in outcome.cost.per_level_T],
            "level_t_final": [lv[1].t_final for lv in outcome.cost.per_level_T],
            "depth_t_final": depth.t_final,
            "d_max": depth.d_max,
            "cellsize": h,
            "grid_shape": list(omega.grid.shape),
        },
        "solver_steps": {"depth": depth.steps, "levels": outcome.solver_steps},
        "stalled_paths": sum(1 for p in outcome.paths if getattr(p, "stalled", False)),
        "profitable": outcome.profitable,
        "wall_time_s": wall,
        "backend": kernels.BACKEND,
        "version": __version__,
    }
    with open(os.path.join(out_dir, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return outcome


def write_outputs(outcome, out_dir):
    """Rasters, metrics, paths and the SVG figure for one outcome."""
    from .render import render_svg

    os.makedirs(out_dir, exist_ok=True)
    omega = outcome.omega

    def put(name, text):
        with open(os.path.join(out_dir, name), "w") as fh:
            fh.write(text)

    put("metrics.json", json.dumps(outcome.metrics(), indent=2, sort_keys=True) + "\n")
    put("cost.asc", write_esri_ascii(outcome.cost.C.masked(omega)))
    put("profit.asc", write_esri_ascii(outcome.profit.P))
    put("psi.asc", write_esri_ascii(outcome.psi))
    put("benefit.asc", write_esri_ascii(outcome.benefit.B))
    put("pristine.asc", write_mask_ascii(outcome.pristine_mask))
    put("high_profit.asc", write_mask_ascii(outcome.high_profit_mask))
    put("omega.asc", write_mask_ascii(omega))
    put("paths.csv", write_polylines_csv(outcome.paths))
    put("outcome.svg", render_svg(outcome))


# --------------------------------------------------------- validation

@dataclass
class ValidationReport:
    max_abs_profit_error: float
    max_abs_cost_error: float
    h: float
    passed: bool
    p_max: float = float("nan")
    p_max_exact: float = float("nan")
    piecewise_profit_error: float = float("nan")
    tol_profit: float = 0.015
    tol_cost: float = float("nan")

    @property
    def pass_(self):
        return self.passed

    def to_dict(self):
        return dict(self.__dict__)


def _disc_setup(h):
    pad = 5 * h
    grid = Grid.from_extent(-1 - pad, 1 + pad, -1 - pad, 1 + pad, h)
    omega = disc_mask(grid, (0.0, 0.0), 1.0)
    X, Y = grid.mesh()
    r = np.hypot(X, Y)
    return grid, omega, r


def _disc_cost(grid, omega, r, psi_vals, alpha, n_levels, solver, phi0):
    B = BenefitField.from_field(ScalarField(grid, np.where(omega.inside, 2.0 * (1.0 - r), np.nan)))
    speed = SpeedField(ScalarField.constant(grid, 1.0))
    pat = patrols.PatrolStrategy(ScalarField(grid, psi_vals), 0.0)
    levels = solve_levels(speed, pat, alpha, np.linspace(B.B_min, B.B_max, n_levels), phi0, solver, omega)
    C = assemble_cost(levels, B)
    return B, C, profit(B, C)


def validate_circle(h=0.01, alpha=1.0, E=1.0, N=17, tol_profit=0.015, tol_cost=None,
                    solver=SolverParams(), piecewise=True):
    """Compare the unit-disc pipeline with the closed forms.

    Setup: v = 1, psi = E/pi, B = 2(1 - r). With ``p = alpha*psi`` the exact
    cost is ``C = d + 2 p d^2`` and the profit ``P = d - 2 p d^2`` (d = 1 - r).
    A second run uses psi piecewise constant in r (E/pi scaled by 1/2 inside
    r = 1/2 and by 3/2 outside), for which ``C = d + alpha B Psi(r)`` with
    ``Psi(r)`` the radial integral of psi from r to 1.
    """
    grid, omega, r = _disc_setup(h)
    d = 1.0 - r
    sel = omega.inside & (d >= 0.05) & (d <= 0.95)
    phi0 = boundary_phi0(omega)
    psi0 = E / math.pi
    p = alpha * psi0
    _, C, P = _disc_cost(grid, omega, r, np.where(omega.inside, psi0, 0.0), alpha, N, solver, phi0)
    C_ex = d + 2.0 * p * d * d
    P_ex = d - 2.0 * p * d * d
    err_c = float(np.max(np.abs(C.C.values - C_ex)[sel]))
    err_p = float(np.max(np.abs(P.P.values - P_ex)[sel]))
    p_max_exact = 1.0 / (8.0 * p) if p >= 0.25 else 1.0 - 2.0 * p
    if tol_cost is None:
        tol_cost = 2.0 * h * (1.0 + 2.0 * p)

    err_pw = 0.0
    if piecewise and alpha > 0 and E > 0:
        lo, hi = 0.5 * psi0, 1.5 * psi0
        psi_pw = np.where(omega.inside, np.where(r < 0.5, lo, hi), 0.0)
        B, _, P2 = _disc_cost(grid, omega, r, psi_pw, alpha, N, solver, phi0)
        Psi = np.where(r < 0.5, lo * (0.5 - r) + hi * 0.5, hi * (1.0 - r))
        P2_ex = 2.0 * d - (d + alpha * B.B.values * Psi)
        err_pw = float(np.max(np.abs(P2.P.values - P2_ex)[sel]))

    passed = err_p <= tol_profit and err_c <= tol_cost and err_pw <= tol_profit
    return ValidationReport(err_p, err_c, h, bool(passed), P.P_max, p_max_exact, err_pw,
                            tol_profit, tol_cost)


# ---------------------------------------------------------- synthetic

def make_synthetic(spec, out_dir):
    """Write a synthetic terrain (plus mask, slope and speed rasters) as ESRI ASCII.

    ``spec`` holds ``terrain`` (kind), ``grid`` and ``params`` as in the
    synthetic terrain config, plus an optional ``mask``. When ``grid`` is
    omitted for a disc mask, the grid spans the disc's bounding box with
    ``cellsize`` from the spec.
    """
    from .grid import gradient_central
    from .terrain import make_mask, walking_speed

    spec = dict(spec)
    mask_spec = spec.get("mask")
    if "grid" not in spec:
        if not mask_spec or mask_spec.get("kind") != "disc":
            raise ConfigError("/grid", "missing required key")
        c = mask_spec.get("center", [0.0, 0.0])
        rad = mask_spec["radius"]
        spec["grid"] = {"xmin": c[0] - rad, "xmax": c[0] + rad, "ymin": c[1] - rad, "ymax": c[1] + rad,
                        "cellsize": spec.get("cellsize", 0.01)}
    t = _terrain({"kind": "synthetic", "terrain": spec.get("terrain", spec.get("kind")),
                  "grid": spec["grid"], "params": spec.get("params", {})}, "")
    g = t["grid"]
    grid = Grid.from_extent(g["xmin"], g["xmax"], g["ymin"], g["ymax"], g["cellsize"])
    z = ScalarField(grid, synthetic_elevation(t["terrain"], grid, t["params"]))
    gx, gy = gradient_central(z)
    s = np.hypot(gx.values, gy.values)
    os.makedirs(out_dir, exist_ok=True)
    files = {
        "elevation.asc": write_esri_ascii(z),
        "slope.asc": write_esri_ascii(ScalarField(grid, s)),
        "speed.asc": write_esri_ascii(ScalarField(grid, walking_speed(s))),
    }
    if mask_spec:
        files["mask.asc"] = write_mask_ascii(make_mask(grid, mask_spec))
    for name, text in files.items():
        with open(os.path.join(out_dir, name), "w") as fh:
            fh.write(text)
    return sorted(files)
