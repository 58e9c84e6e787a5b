"""Uniform node-registered rasters and the geometry that lives on them.

Arrays are indexed ``values[iy, ix]`` with row 0 at the southern edge, so
node ``(ix, iy)`` sits at ``(x0 + ix*h, y0 + iy*h)``.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np

from . import kernels


class GridError(ValueError):
    pass


@dataclass(frozen=True)
class Grid:
    nx: int
    ny: int
    cellsize: float
    origin: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        if self.nx < 2 or self.ny < 2:
            raise GridError(f"grid needs at least 2x2 nodes, got {self.nx}x{self.ny}")
        if not self.cellsize > 0:
            raise GridError(f"cellsize must be positive, got {self.cellsize}")
        object.__setattr__(self, "origin", (float(self.origin[0]), float(self.origin[1])))

    @classmethod
    def from_extent(cls, xmin, xmax, ymin, ymax, cellsize):
        """Grid whose nodes span the given box (rounded to whole cells)."""
        nx = int(round((xmax - xmin) / cellsize)) + 1
        ny = int(round((ymax - ymin) / cellsize)) + 1
        return cls(nx, ny, cellsize, (xmin, ymin))

    @property
    def shape(self):
        return (self.ny, self.nx)

    @property
    def xs(self):
        return self.origin[0] + self.cellsize * np.arange(self.nx)

    @property
    def ys(self):
        return self.origin[1] + self.cellsize * np.arange(self.ny)

    @property
    def extent(self):
        x0, y0 = self.origin
        return (x0, x0 + (self.nx - 1) * self.cellsize, y0, y0 + (self.ny - 1) * self.cellsize)

    def mesh(self):
        """``(X, Y)`` node coordinate arrays, each of shape ``(ny, nx)``."""
        return np.meshgrid(self.xs, self.ys)

    def node_xy(self, ix, iy):
        return (self.origin[0] + ix * self.cellsize, self.origin[1] + iy * self.cellsize)

    def nearest_node(self, p):
        ix = int(round((p[0] - self.origin[0]) / self.cellsize))
        iy = int(round((p[1] - self.origin[1]) / self.cellsize))
        return ix, iy

    def contains(self, p):
        x0, x1, y0, y1 = self.extent
        return x0 <= p[0] <= x1 and y0 <= p[1] <= y1

    def subgrid(self, ix0, ix1, iy0, iy1):
        """Grid covering node ranges ``[ix0, ix1) x [iy0, iy1)``."""
        return Grid(ix1 - ix0, iy1 - iy0, self.cellsize, self.node_xy(ix0, iy0))


def _readonly(a, dtype):
    a = np.array(a, dtype=dtype, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class ScalarField:
    grid: Grid
    values: np.ndarray
    nodata_mask: np.ndarray = None

    def __post_init__(self):
        values = _readonly(self.values, np.float64)
        if values.shape != self.grid.shape:
            raise GridError(f"values shape {values.shape} does not match grid {self.grid.shape}")
        if self.nodata_mask is None:
            nodata = ~np.isfinite(values)
        else:
            nodata = np.asarray(self.nodata_mask, dtype=bool)
            if nodata.shape != values.shape:
                raise GridError("nodata_mask shape does not match values")
            if not np.all(np.isfinite(values[~nodata])):
                raise GridError("non-finite values outside the nodata mask")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "nodata_mask", _readonly(nodata, bool))

    @classmethod
    def constant(cls, grid, value):
        return cls(grid, np.full(grid.shape, float(value)))

    @classmethod
    def from_function(cls, grid, fn):
        X, Y = grid.mesh()
        return cls(grid, np.broadcast_to(fn(X, Y), grid.shape))

    def with_values(self, values, nodata_mask=None):
        return ScalarField(self.grid, values, nodata_mask)

    def masked(self, mask):
        """Copy with everything outside ``mask`` turned into nodata."""
        inside = mask.inside if isinstance(mask, DomainMask) else np.asarray(mask, bool)
        vals = np.where(inside, self.values, np.nan)
        return ScalarField(self.grid, vals, ~inside | self.nodata_mask)


@dataclass(frozen=True, eq=False)
class Polyline:
    vertices: np.ndarray
    closed: bool = False

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=np.float64).reshape(-1, 2)
        if len(v) < 2:
            raise GridError("polyline needs at least 2 vertices")
        if np.any(np.all(v[1:] == v[:-1], axis=1)):
            raise GridError("consecutive polyline vertices must be distinct")
        object.__setattr__(self, "vertices", _readonly(v, np.float64))

    def __len__(self):
        return len(self.vertices)

    def segments(self):
        """``(k, 4)`` array of ``x0, y0, x1, y1`` rows, including the closing edge."""
        v = self.vertices
        if self.closed and not np.array_equal(v[0], v[-1]):
            v = np.vstack([v, v[:1]])
        return np.hstack([v[:-1], v[1:]])

    def length(self):
        s = self.segments()
        return float(np.hypot(s[:, 2] - s[:, 0], s[:, 3] - s[:, 1]).sum())


@dataclass(frozen=True, eq=False)
class DomainMask:
    """Boolean region on a grid.

    ``boundary`` optionally carries the exact outline (e.g. the true circle of
    a disc mask); when absent, the outline is traced from the node mask.
    """

    grid: Grid
    inside: np.ndarray
    boundary: tuple = field(default=None)

    def __post_init__(self):
        inside = _readonly(self.inside, bool)
        if inside.shape != self.grid.shape:
            raise GridError("mask shape does not match grid")
        object.__setattr__(self, "inside", inside)
        if self.boundary is not None:
            object.__setattr__(self, "boundary", tuple(self.boundary))

    @property
    def count(self):
        return int(self.inside.sum())

    @property
    def empty(self):
        return not self.inside.any()

    def area(self):
        return self.count * self.grid.cellsize ** 2

    def validate(self):
        """Check the invariants required of a protected region."""
        if self.empty:
            raise GridError("domain mask has no inside cells")
        m = self.inside
        if m[0].any() or m[-1].any() or m[:, 0].any() or m[:, -1].any():
            raise GridError("domain mask touches the raster border; keep a one-cell margin")
        return self

    def bbox(self):
        """Node index bounds ``(ix0, ix1, iy0, iy1)``, inclusive."""
        iy, ix = np.nonzero(self.inside)
        return int(ix.min()), int(ix.max()), int(iy.min()), int(iy.max())

    def outline(self):
        """Boundary polylines: the exact outline if known, else traced from nodes."""
        if self.boundary is not None:
            return list(self.boundary)
        indicator = ScalarField(self.grid, self.inside.astype(np.float64))
        return marching_squares(indicator, 0.5)

    def perimeter(self):
        return sum(p.length() for p in self.outline())

    def __and__(self, other):
        return DomainMask(self.grid, self.inside & other.inside)

    def __or__(self, other):
        return DomainMask(self.grid, self.inside | other.inside)

    def __sub__(self, other):
        return DomainMask(self.grid, self.inside & ~other.inside)


def _cell_index(grid, p):
    x0, y0 = grid.origin
    fx = (p[0] - x0) / grid.cellsize
    fy = (p[1] - y0) / grid.cellsize
    if not (0.0 <= fx <= grid.nx - 1 and 0.0 <= fy <= grid.ny - 1):
        raise GridError(f"point {tuple(p)} outside grid extent {grid.extent}")
    ix = min(int(np.floor(fx)), grid.nx - 2)
    iy = min(int(np.floor(fy)), grid.ny - 2)
    return ix, iy, fx - ix, fy - iy


def bilinear_sample(field, p):
    ix, iy, tx, ty = _cell_index(field.grid, p)
    if field.nodata_mask[iy:iy + 2, ix:ix + 2].any():
        raise GridError(f"nodata neighbour at {tuple(p)}")
    v = field.values
    return float(
        (1 - tx) * (1 - ty) * v[iy, ix]
        + tx * (1 - ty) * v[iy, ix + 1]
        + (1 - tx) * ty * v[iy + 1, ix]
        + tx * ty * v[iy + 1, ix + 1]
    )


def gradient_central(field):
    """Central differences in the interior, first-order one-sided at the edges.

    Nodes whose stencil touches nodata are returned as nodata.
    """
    vals = np.where(field.nodata_mask, np.nan, field.values)
    gy, gx = np.gradient(vals, field.grid.cellsize, edge_order=1)
    bad = ~np.isfinite(gx) | ~np.isfinite(gy)
    gx = np.where(bad, np.nan, gx)
    gy = np.where(bad, np.nan, gy)
    return ScalarField(field.grid, gx, bad), ScalarField(field.grid, gy, bad)


# edges: 0 bottom, 1 right, 2 top, 3 left; corner bits: bl=1, br=2, tr=4, tl=8
_CASES = {
    1: [(3, 0)], 2: [(0, 1)], 3: [(3, 1)], 4: [(1, 2)], 6: [(0, 2)], 7: [(3, 2)],
    8: [(2, 3)], 9: [(0, 2)], 11: [(1, 2)], 12: [(3, 1)], 13: [(0, 1)], 14: [(3, 0)],
}
# saddles, keyed by (case, centre_high)
_SADDLES = {
    (5, True): [(0, 1), (2, 3)], (5, False): [(3, 0), (1, 2)],
    (10, True): [(3, 0), (1, 2)], (10, False): [(0, 1), (2, 3)],
}


def marching_squares(field, level):
    """Iso-contours of ``field`` at ``level`` as polylines in world coordinates.

    A node counts as high when ``value >= level``. Ambiguous saddle cells are
    resolved by the cell-centre average: a high centre joins the high corners.
    """
    v = field.values
    if field.nodata_mask.any():
        v = np.where(field.nodata_mask, -np.inf, v)
    ny, nx = v.shape
    high = v >= level
    code = (high[:-1, :-1] * 1 + high[:-1, 1:] * 2 + high[1:, 1:] * 4 + high[1:, :-1] * 8)
    cj, ci = np.nonzero((code != 0) & (code != 15))
    if len(cj) == 0:
        return []

    h = field.grid.cellsize
    x0, y0 = field.grid.origin
    points = {}

    def edge_point(key):
        pt = points.get(key)
        if pt is None:
            kind, j, i = key
            a = v[j, i]
            if kind == "h":
                b = v[j, i + 1]
                t = (level - a) / (b - a)
                pt = (x0 + (i + t) * h, y0 + j * h)
            else:
                b = v[j + 1, i]
                t = (level - a) / (b - a)
                pt = (x0 + i * h, y0 + (j + t) * h)
            points[key] = pt
        return pt

    links = {}
    for j, i, c in zip(cj.tolist(), ci.tolist(), code[cj, ci].tolist()):
        edges = (("h", j, i), ("v", j, i + 1), ("h", j + 1, i), ("v", j, i))
        if c in (5, 10):
            centre = 0.25 * (v[j, i] + v[j, i + 1] + v[j + 1, i] + v[j + 1, i + 1])
            pairs = _SADDLES[(c, bool(centre >= level))]
        else:
            pairs = _CASES[c]
        for e0, e1 in pairs:
            a, b = edges[e0], edges[e1]
            links.setdefault(a, []).append(b)
            links.setdefault(b, []).append(a)

    used = set()
    out = []

    def walk(start):
        chain = [start]
        cur = start
        while True:
            nxt = next((c for c in links[cur] if (cur, c) not in used), None)
            if nxt is None:
                return chain, False
            used.add((cur, nxt))
            used.add((nxt, cur))
            if nxt == start:
                return chain, True
            chain.append(nxt)
            cur = nxt

    # open chains start at border edges (degree 1), then the remaining loops
    starts = [k for k, nb in links.items() if len(nb) == 1]
    starts += [k for k in links if len(links[k]) != 1]
    for s in starts:
        if all((s, n) in used for n in links[s]):
            continue
        chain, closed = walk(s)
        pts = np.array([edge_point(k) for k in chain])
        keep = np.ones(len(pts), dtype=bool)
        keep[1:] = np.any(pts[1:] != pts[:-1], axis=1)
        pts = pts[keep]
        if closed and len(pts) > 1 and np.array_equal(pts[0], pts[-1]):
            pts = pts[:-1]
        if len(pts) >= 2:
            out.append(Polyline(pts, closed=closed and len(pts) >= 3))
    return out


def _all_segments(contours):
    segs = [c.segments() for c in contours]
    return np.vstack(segs) if segs else np.zeros((0, 4))


def crossing_parity(grid, contours):
    """Even-odd parity of each node with respect to the (implicitly closed) contours.

    A ray is cast in +x from every node; crossings are counted row by row with
    the half-open rule ``min(y) <= y_row < max(y)``.
    """
    segs = np.vstack([
        Polyline(c.vertices, closed=True).segments() if len(c) >= 3 else c.segments()
        for c in contours
    ])
    ya, yb = segs[:, 1], segs[:, 3]
    lo, hi = np.minimum(ya, yb), np.maximum(ya, yb)
    xs = grid.xs
    parity = np.zeros(grid.shape, dtype=bool)
    for j, yj in enumerate(grid.ys):
        hit = (lo <= yj) & (yj < hi)
        if not hit.any():
            continue
        s = segs[hit]
        xc = s[:, 0] + (yj - s[:, 1]) * (s[:, 2] - s[:, 0]) / (s[:, 3] - s[:, 1])
        xc.sort()
        right = len(xc) - np.searchsorted(xc, xs, side="right")
        parity[j] = (right % 2) == 1
    return parity


def _point_parity(p, contours):
    g = Grid(3, 3, 1.0, (p[0], p[1]))
    return bool(crossing_parity(g, contours)[0, 0])


def unsigned_distance(grid, contours):
    segs = _all_segments(contours)
    if len(segs) == 0:
        raise GridError("no contour segments")
    return kernels.segment_distance(grid.xs, grid.ys, segs)


def signed_distance(grid, contours, inside_ref):
    """Exact distance to the nearest contour segment, positive on the side of
    ``inside_ref`` under even-odd parity."""
    contours = list(contours)
    if not contours:
        raise GridError("signed_distance needs at least one contour")
    for c in contours:
        if c.length() == 0.0:
            raise GridError("degenerate zero-length contour")
    d = unsigned_distance(grid, contours)
    parity = crossing_parity(grid, contours)
    ref = _point_parity(inside_ref, contours)
    return ScalarField(grid, np.where(parity == ref, d, -d))


def integrate(field, mask):
    """Midpoint-rule integral of ``field`` over ``mask``."""
    inside = mask.inside if isinstance(mask, DomainMask) else np.asarray(mask, bool)
    return float(field.values[inside].sum()) * field.grid.cellsize ** 2


def write_polylines_csv(polylines, fp=None):
    """Serialize polylines: ``# closed=<0|1>`` header, ``x,y`` rows, blank line between."""
    buf = io.StringIO()
    for n, pl in enumerate(polylines):
        if n:
            buf.write("\n")
        buf.write(f"# closed={int(bool(pl.closed))}\n")
        for x, y in pl.vertices:
            buf.write(f"{float(x)!r},{float(y)!r}\n")
    text = buf.getvalue()
    if fp is not None:
        fp.write(text)
    return text


def read_polylines_csv(text):
    polylines = []
    closed, verts = False, []

    def flush():
        if verts:
            polylines.append(Polyline(np.array(verts), closed=closed))

    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            flush()
            verts = []
            continue
        if line.startswith("#"):
            flush()
            verts = []
            closed = line.replace(" ", "").lower() == "#closed=1"
            continue
        x, y = line.split(",")
        verts.append((float(x), float(y)))
    flush()
    return polylines
