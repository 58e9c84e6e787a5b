"""Elevation ingestion and the slope -> walking-speed conversion."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .grid import DomainMask, Grid, GridError, Polyline, ScalarField, gradient_central

MAX_SPEED = 1.11  # m/s on gentle terrain
DEFAULT_V_MIN = 0.01


class EsriParseError(ValueError):
    def __init__(self, message, line=None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


@dataclass(frozen=True, eq=False)
class ElevationModel:
    elevation: ScalarField
    mask: DomainMask

    def __post_init__(self):
        self.mask.validate()
        if self.elevation.nodata_mask[self.mask.inside].any():
            raise GridError("elevation has nodata inside the protected region")

    @property
    def grid(self):
        return self.elevation.grid


@dataclass(frozen=True, eq=False)
class SpeedField:
    v: ScalarField
    v_min: float = DEFAULT_V_MIN


_REQUIRED = ("ncols", "nrows", "cellsize")


def load_esri_ascii(text):
    """Parse an ESRI ASCII grid into a node-registered field.

    Rows arrive north-to-south and are flipped so that row 0 is southern. The
    lower-left node is placed at ``(xllcorner, yllcorner)`` (``xllcenter`` is
    accepted as a synonym). Nodata cells become NaN and are flagged.
    """
    if isinstance(text, bytes):
        text = text.decode("ascii")
    lines = text.splitlines()
    header = {}
    lineno = 0
    while lineno < len(lines):
        raw = lines[lineno].strip()
        if not raw:
            lineno += 1
            continue
        parts = raw.split()
        if not parts[0][0].isalpha():
            break
        key = parts[0].lower()
        if len(parts) != 2:
            raise EsriParseError(f"malformed header entry {raw!r}", lineno + 1)
        if key in ("dx", "dy"):
            raise EsriParseError("non-square cells (dx/dy keys) are not supported", lineno + 1)
        if key in header:
            raise EsriParseError(f"duplicate header key {key!r}", lineno + 1)
        try:
            header[key] = float(parts[1])
        except ValueError:
            raise EsriParseError(f"header value for {key!r} is not a number", lineno + 1) from None
        lineno += 1

    for key in _REQUIRED:
        if key not in header:
            raise EsriParseError(f"missing header key {key!r}", lineno + 1)
    x0 = header.get("xllcorner", header.get("xllcenter"))
    y0 = header.get("yllcorner", header.get("yllcenter"))
    if x0 is None or y0 is None:
        raise EsriParseError("missing xllcorner/yllcorner", lineno + 1)
    ncols, nrows = header["ncols"], header["nrows"]
    if ncols != int(ncols) or nrows != int(nrows) or ncols < 1 or nrows < 1:
        raise EsriParseError("ncols/nrows must be positive integers", 1)
    ncols, nrows = int(ncols), int(nrows)

    values = []
    for k in range(lineno, len(lines)):
        for tok in lines[k].split():
            try:
                values.append(float(tok))
            except ValueError:
                raise EsriParseError(f"bad value {tok!r}", k + 1) from None
    if len(values) != ncols * nrows:
        raise EsriParseError(
            f"expected {ncols * nrows} values ({nrows} rows x {ncols} cols), found {len(values)}",
            len(lines))

    arr = np.array(values, dtype=np.float64).reshape(nrows, ncols)[::-1]
    nodata = np.zeros(arr.shape, dtype=bool)
    if "nodata_value" in header:
        nodata = arr == header["nodata_value"]
    nodata |= ~np.isfinite(arr)
    arr = np.where(nodata, np.nan, arr)
    grid = Grid(ncols, nrows, header["cellsize"], (x0, y0))
    return ScalarField(grid, arr, nodata)


def write_esri_ascii(field, nodata_value=-9999.0):
    """Inverse of :func:`load_esri_ascii`; values are written round-trip exact.

    If a data value collides with ``nodata_value``, a sentinel just below the
    data minimum is written instead.
    """
    g = field.grid
    data = field.values[~field.nodata_mask]
    if np.any(data == nodata_value):
        nodata_value = float(np.nextafter(data.min(), -np.inf))
    out = [
        f"ncols {g.nx}",
        f"nrows {g.ny}",
        f"xllcorner {g.origin[0]!r}",
        f"yllcorner {g.origin[1]!r}",
        f"cellsize {g.cellsize!r}",
        f"NODATA_value {nodata_value!r}",
    ]
    vals = np.where(field.nodata_mask, nodata_value, field.values)
    for row in vals[::-1]:
        out.append(" ".join(repr(float(v)) for v in row))
    return "\n".join(out) + "\n"


def write_mask_ascii(mask):
    return write_esri_ascii(ScalarField(mask.grid, mask.inside.astype(np.float64)))


def slope_magnitude(elev):
    """Unsigned rise/run ``|grad h|`` by central differences."""
    h = elev.elevation
    grown = _dilate(elev.mask.inside)
    if h.nodata_mask[grown].any():
        raise GridError("elevation has nodata within one cell of the protected region")
    gx, gy = gradient_central(h)
    return ScalarField(h.grid, np.hypot(gx.values, gy.values), gx.nodata_mask)


def _dilate(m):
    out = m.copy()
    out[1:] |= m[:-1]
    out[:-1] |= m[1:]
    out[:, 1:] |= m[:, :-1]
    out[:, :-1] |= m[:, 1:]
    return out


def walking_speed(s):
    """Walking speed in m/s for slope magnitude ``s`` (rise over run).

    ``1.11 * exp(-(100 s + 2)^2 / 2345)``: a Gaussian in percent grade that
    peaks just below 1.11 m/s on the flat and decays to zero on cliffs.
    """
    s_arr = np.asarray(s, dtype=np.float64)
    if np.any(s_arr < 0):
        raise ValueError("slope magnitude must be non-negative")
    v = MAX_SPEED * np.exp(-((100.0 * s_arr + 2.0) ** 2) / 2345.0)
    return float(v) if np.ndim(s) == 0 else v


def road_walking_speed(s):
    """Reference road-walking formula ``0.11 + exp(-(100 s + 2)^2 / 1800)``,
    which does not vanish on steep ground."""
    return 0.11 + np.exp(-((100.0 * np.asarray(s, dtype=np.float64) + 2.0) ** 2) / 1800.0)


def speed_field(elev, v_min=DEFAULT_V_MIN, overrides=None):
    """Walking speed everywhere the slope is defined, floored at ``v_min``.

    ``overrides`` is a multiplicative factor raster (e.g. 0 for a lake, 1.5
    for a trail); non-finite override cells leave the speed unchanged.
    Nodes without a defined slope (nodata terrain) get ``v_min``.
    """
    if not v_min > 0:
        raise ValueError("v_min must be positive")
    s = slope_magnitude(elev)
    v = np.full(s.grid.shape, float(v_min))
    ok = ~s.nodata_mask
    v[ok] = np.maximum(walking_speed(s.values[ok]), v_min)
    if overrides is not None:
        if overrides.grid != s.grid:
            raise GridError("override raster is not co-registered with the terrain")
        f = overrides.values
        use = np.isfinite(f) & ~overrides.nodata_mask
        v[use] = np.maximum(v[use] * f[use], v_min)
    return SpeedField(ScalarField(s.grid, v), float(v_min))


# ---------------------------------------------------------------- masks

def disc_mask(grid, center=(0.0, 0.0), radius=1.0, n_vertices=None):
    X, Y = grid.mesh()
    cx, cy = center
    inside = (X - cx) ** 2 + (Y - cy) ** 2 <= radius ** 2
    if n_vertices is None:
        n_vertices = max(256, int(math.ceil(2 * math.pi * radius / (grid.cellsize / 8))))
    th = 2 * math.pi * np.arange(n_vertices) / n_vertices
    ring = Polyline(np.column_stack([cx + radius * np.cos(th), cy + radius * np.sin(th)]), closed=True)
    return DomainMask(grid, inside, boundary=(ring,))


def rectangle_mask(grid, xmin, xmax, ymin, ymax):
    X, Y = grid.mesh()
    inside = (X >= xmin) & (X <= xmax) & (Y >= ymin) & (Y <= ymax)
    ring = Polyline([(xmin, ymin), (xmax, ymin), (xmax, ymax), (xmin, ymax)], closed=True)
    return DomainMask(grid, inside, boundary=(ring,))


def polygon_mask(grid, vertices):
    from .grid import crossing_parity

    ring = Polyline(np.asarray(vertices, dtype=np.float64), closed=True)
    inside = crossing_parity(grid, [ring])
    return DomainMask(grid, inside, boundary=(ring,))


def nodata_mask(field):
    """Protected region = data nodes whose 4-neighbours all carry data.

    The one-node erosion keeps central slopes defined on the region.
    """
    data = ~field.nodata_mask
    inside = data.copy()
    inside[0, :] = inside[-1, :] = False
    inside[:, 0] = inside[:, -1] = False
    inside[1:-1, 1:-1] &= data[:-2, 1:-1] & data[2:, 1:-1] & data[1:-1, :-2] & data[1:-1, 2:]
    return DomainMask(field.grid, inside)


def make_mask(grid, spec):
    """Build a mask from a ``{"kind": ...}`` dict (disc, rectangle or polygon)."""
    kind = spec.get("kind", "disc")
    if kind == "disc":
        return disc_mask(grid, tuple(spec.get("center", (0.0, 0.0))), float(spec.get("radius", 1.0)))
    if kind == "rectangle":
        return rectangle_mask(grid, spec["xmin"], spec["xmax"], spec["ymin"], spec["ymax"])
    if kind == "polygon":
        return polygon_mask(grid, spec["vertices"])
    raise ValueError(f"unknown mask kind {kind!r}")


# ------------------------------------------------------------ synthetic

SYNTHETIC_KINDS = ("flat", "ramp", "ridge", "crater")


def make_synthetic_terrain(kind, grid, params=None):
    """Analytic elevation surface plus a protected-region mask.

    ``params`` keys by kind:
      ramp   -- ``slope`` (rise/run), ``direction`` (degrees from +x)
      ridge  -- ``height``, ``sigma``, ``x0``: Gaussian ridge along y
      crater -- ``rim_radius``, ``rim_height``, ``rim_width``, ``center``
    and ``mask`` (see :func:`make_mask`; default: rectangle inset two cells).
    """
    params = dict(params or {})
    z = synthetic_elevation(kind, grid, params)
    if "mask" in params:
        mask = make_mask(grid, params["mask"])
    else:
        x0, x1, y0, y1 = grid.extent
        m = 2 * grid.cellsize
        mask = rectangle_mask(grid, x0 + m, x1 - m, y0 + m, y1 - m)
    return ElevationModel(ScalarField(grid, z), mask)


def synthetic_elevation(kind, grid, params=None):
    """Elevation array for one of :data:`SYNTHETIC_KINDS`."""
    params = dict(params or {})
    X, Y = grid.mesh()
    if kind == "flat":
        z = np.zeros(grid.shape)
    elif kind == "ramp":
        s = float(params.get("slope", 0.1))
        a = math.radians(float(params.get("direction", 0.0)))
        z = s * (math.cos(a) * X + math.sin(a) * Y)
    elif kind == "ridge":
        H = float(params.get("height", 100.0))
        sig = float(params.get("sigma", 50.0))
        x0 = float(params.get("x0", 0.0))
        z = H * np.exp(-((X - x0) ** 2) / (2 * sig ** 2))
    elif kind == "crater":
        cx, cy = params.get("center", (0.0, 0.0))
        R = float(params.get("rim_radius", 50.0))
        H = float(params.get("rim_height", 30.0))
        w = float(params.get("rim_width", 10.0))
        r = np.hypot(X - cx, Y - cy)
        z = H * np.exp(-((r - R) ** 2) / (2 * w ** 2)) - H * np.exp(-(r ** 2) / (2 * (R / 2) ** 2))
    else:
        raise ValueError(f"unknown synthetic terrain kind {kind!r}; expected one of {SYNTHETIC_KINDS}")
    return z
