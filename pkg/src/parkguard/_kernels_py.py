"""Pure numpy/scipy versions of the compiled kernels.

Used when the extension is not built, or when ``PARKGUARD_PURE_PYTHON=1``.
"""

import numpy as np
from scipy.spatial import cKDTree


def eno2_minus_plus(a, h, axis, order=2):
    """Second-order ENO one-sided derivatives of ``a`` along ``axis``.

    Interior nodes get the first difference plus half the smaller-magnitude
    undivided second difference; nodes whose stencil would leave the array
    fall back to first-order one-sided differences. ``order=1`` returns the
    plain first differences everywhere.
    """
    a = np.moveaxis(np.asarray(a, dtype=np.float64), axis, -1)
    n = a.shape[-1]
    d = np.diff(a, axis=-1) / h
    minus = np.empty_like(a)
    plus = np.empty_like(a)
    minus[..., 1:] = d
    plus[..., :-1] = d
    minus[..., 0] = d[..., 0]
    plus[..., -1] = d[..., -1]

    if order >= 2 and n >= 4:
        d2 = a[..., 2:] - 2.0 * a[..., 1:-1] + a[..., :-2]  # d2[k] centred on node k+1
        left, right = d2[..., :-1], d2[..., 1:]
        pick = np.where(np.abs(left) <= np.abs(right), left, right)
        # minus at nodes 2..n-2 uses centres (i-1, i); plus at 1..n-3 uses (i, i+1)
        minus[..., 2:n - 1] += 0.5 / h * pick
        plus[..., 1:n - 2] -= 0.5 / h * pick
    return np.moveaxis(minus, -1, axis), np.moveaxis(plus, -1, axis)


def godunov_hamiltonian_field(phi, vtilde, h, order=2):
    xm, xp = eno2_minus_plus(phi, h, 1, order)
    ym, yp = eno2_minus_plus(phi, h, 0, order)
    gx = np.maximum(np.maximum(xm, 0.0) ** 2, np.minimum(xp, 0.0) ** 2)
    gy = np.maximum(np.maximum(ym, 0.0) ** 2, np.minimum(yp, 0.0) ** 2)
    return vtilde * np.sqrt(gx + gy)


def _point_segment_distance(px, py, segs):
    """Broadcast distance between points ``(..., )`` and segments ``(..., 4)``."""
    ax, ay, bx, by = segs[..., 0], segs[..., 1], segs[..., 2], segs[..., 3]
    dx, dy = bx - ax, by - ay
    L2 = dx * dx + dy * dy
    with np.errstate(invalid="ignore", divide="ignore"):
        t = ((px - ax) * dx + (py - ay) * dy) / L2
    t = np.where(L2 > 0.0, np.clip(t, 0.0, 1.0), 0.0)
    qx = ax + t * dx - px
    qy = ay + t * dy - py
    return np.sqrt(qx * qx + qy * qy)


def segment_distance_brute(xs, ys, segs, chunk=4096):
    """Brute-force nearest-segment distance; O(nodes x segments)."""
    X, Y = np.meshgrid(xs, ys)
    px, py = X.ravel(), Y.ravel()
    out = np.empty(px.size)
    step = max(1, chunk * 64 // max(len(segs), 1))
    for s in range(0, px.size, step):
        d = _point_segment_distance(px[s:s + step, None], py[s:s + step, None], segs[None, :, :])
        out[s:s + step] = d.min(axis=1)
    return out.reshape(len(ys), len(xs))


def segment_distance(xs, ys, segs, k=12):
    """Exact nearest-segment distance using a KD-tree over segment midpoints.

    For a segment with midpoint distance m and half-length l, the true
    distance lies in [m - l, m]. Nodes whose k-th midpoint is not provably
    farther than the best candidate are recomputed by brute force.
    """
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    segs = np.asarray(segs, dtype=np.float64).reshape(-1, 4)
    if len(segs) == 0:
        return np.full((len(ys), len(xs)), np.inf)
    k = min(k, len(segs))
    mid = 0.5 * (segs[:, :2] + segs[:, 2:])
    half = 0.5 * np.hypot(segs[:, 2] - segs[:, 0], segs[:, 3] - segs[:, 1])
    X, Y = np.meshgrid(xs, ys)
    pts = np.column_stack([X.ravel(), Y.ravel()])
    dmid, idx = cKDTree(mid).query(pts, k=k)
    dmid = dmid.reshape(len(pts), k)
    idx = idx.reshape(len(pts), k)
    d = _point_segment_distance(pts[:, 0:1], pts[:, 1:2], segs[idx])
    best = d.min(axis=1)
    if k < len(segs):
        unsure = dmid[:, -1] - half.max() < best
        if np.any(unsure):
            sub = pts[unsure]
            bd = np.empty(len(sub))
            step = max(1, 262144 // len(segs))
            for s in range(0, len(sub), step):
                bd[s:s + step] = _point_segment_distance(
                    sub[s:s + step, 0:1], sub[s:s + step, 1:2], segs[None, :, :]).min(axis=1)
            best[unsure] = bd
    return best.reshape(len(ys), len(xs))
