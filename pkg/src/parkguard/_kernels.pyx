# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops: the ENO2/Godunov Hamiltonian sweep and exact
nearest-segment distances.

Both functions mirror ``_kernels_py`` one-for-one; the numpy versions are the
reference the test suite compares against.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, fabs, fmin, fmax, INFINITY

cnp.import_array()


cdef inline double _pick(double a, double b) noexcept nogil:
    # ENO choice: the smaller-magnitude second difference
    return a if fabs(a) <= fabs(b) else b


cdef inline double _pos(double a) noexcept nogil:
    return a if a > 0.0 else 0.0


cdef inline double _neg(double a) noexcept nogil:
    return a if a < 0.0 else 0.0


def godunov_hamiltonian_field(const double[:, ::1] phi, const double[:, ::1] vtilde, double h, int order=2):
    """Return vtilde * |grad phi| under the Godunov flux with ENO2 one-sided
    derivatives (plain first differences when ``order == 1``). Arrays are
    indexed ``[iy, ix]``."""
    cdef bint eno = order >= 2
    cdef Py_ssize_t ny = phi.shape[0], nx = phi.shape[1]
    cdef Py_ssize_t i, j
    cdef double inv_h = 1.0 / h, half_inv_h = 0.5 / h
    cdef double xm, xp, ym, yp, gx, gy
    out_arr = np.empty((ny, nx), dtype=np.float64)
    cdef double[:, ::1] out = out_arr

    with nogil:
        for j in range(ny):
            for i in range(nx):
                # x direction
                if i == 0:
                    xm = (phi[j, 1] - phi[j, 0]) * inv_h
                    xp = xm
                elif i == nx - 1:
                    xp = (phi[j, i] - phi[j, i - 1]) * inv_h
                    xm = xp
                else:
                    xm = (phi[j, i] - phi[j, i - 1]) * inv_h
                    xp = (phi[j, i + 1] - phi[j, i]) * inv_h
                    if eno and i >= 2:
                        xm = xm + half_inv_h * _pick(
                            phi[j, i] - 2.0 * phi[j, i - 1] + phi[j, i - 2],
                            phi[j, i + 1] - 2.0 * phi[j, i] + phi[j, i - 1])
                    if eno and i <= nx - 3:
                        xp = xp - half_inv_h * _pick(
                            phi[j, i + 1] - 2.0 * phi[j, i] + phi[j, i - 1],
                            phi[j, i + 2] - 2.0 * phi[j, i + 1] + phi[j, i])
                # y direction
                if j == 0:
                    ym = (phi[1, i] - phi[0, i]) * inv_h
                    yp = ym
                elif j == ny - 1:
                    yp = (phi[j, i] - phi[j - 1, i]) * inv_h
                    ym = yp
                else:
                    ym = (phi[j, i] - phi[j - 1, i]) * inv_h
                    yp = (phi[j + 1, i] - phi[j, i]) * inv_h
                    if eno and j >= 2:
                        ym = ym + half_inv_h * _pick(
                            phi[j, i] - 2.0 * phi[j - 1, i] + phi[j - 2, i],
                            phi[j + 1, i] - 2.0 * phi[j, i] + phi[j - 1, i])
                    if eno and j <= ny - 3:
                        yp = yp - half_inv_h * _pick(
                            phi[j + 1, i] - 2.0 * phi[j, i] + phi[j - 1, i],
                            phi[j + 2, i] - 2.0 * phi[j + 1, i] + phi[j, i])
                gx = fmax(_pos(xm) * _pos(xm), _neg(xp) * _neg(xp))
                gy = fmax(_pos(ym) * _pos(ym), _neg(yp) * _neg(yp))
                out[j, i] = vtilde[j, i] * sqrt(gx + gy)
    return out_arr


cdef inline double _seg_dist2(double px, double py, double ax, double ay,
                              double bx, double by) noexcept nogil:
    cdef double dx = bx - ax, dy = by - ay
    cdef double L2 = dx * dx + dy * dy
    cdef double t = 0.0
    if L2 > 0.0:
        t = ((px - ax) * dx + (py - ay) * dy) / L2
        if t < 0.0:
            t = 0.0
        elif t > 1.0:
            t = 1.0
    cdef double qx = ax + t * dx - px, qy = ay + t * dy - py
    return qx * qx + qy * qy


def segment_distance(const double[::1] xs, const double[::1] ys, const double[:, ::1] segs):
    """Exact Euclidean distance from every node ``(xs[i], ys[j])`` to the
    nearest of the segments ``segs[k] = (x0, y0, x1, y1)``.

    Nodes are grouped into square buckets. For each bucket, the smallest
    farthest-corner distance over all segments bounds the answer for every
    node inside it; only segments that can beat that bound are kept as
    candidates for the bucket's nodes.
    """
    cdef Py_ssize_t nx = xs.shape[0], ny = ys.shape[0], ns = segs.shape[0]
    out_arr = np.empty((ny, nx), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    if ns == 0:
        out_arr.fill(np.inf)
        return out_arr

    cdef Py_ssize_t B = 8  # nodes per bucket side
    cdef Py_ssize_t nbx = (nx + B - 1) // B, nby = (ny + B - 1) // B
    cdef Py_ssize_t bi, bj, i, j, k, i0, i1, j0, j1, m, ncand
    cdef double cx0, cx1, cy0, cy1, ccx, ccy, half_diag, ub, far, d2, best, lb
    cand_arr = np.empty(ns, dtype=np.intp)
    cdef Py_ssize_t[::1] cand = cand_arr
    lbs_arr = np.empty(ns, dtype=np.float64)
    cdef double[::1] lbs = lbs_arr

    with nogil:
        for bj in range(nby):
            j0 = bj * B
            j1 = j0 + B if j0 + B < ny else ny
            cy0 = fmin(ys[j0], ys[j1 - 1])
            cy1 = fmax(ys[j0], ys[j1 - 1])
            for bi in range(nbx):
                i0 = bi * B
                i1 = i0 + B if i0 + B < nx else nx
                cx0 = fmin(xs[i0], xs[i1 - 1])
                cx1 = fmax(xs[i0], xs[i1 - 1])
                ccx = 0.5 * (cx0 + cx1)
                ccy = 0.5 * (cy0 + cy1)
                half_diag = 0.5 * sqrt((cx1 - cx0) * (cx1 - cx0) + (cy1 - cy0) * (cy1 - cy0))
                # ub: every node in the bucket is within ub of some segment
                ub = INFINITY
                for k in range(ns):
                    lb = sqrt(_seg_dist2(ccx, ccy, segs[k, 0], segs[k, 1], segs[k, 2], segs[k, 3]))
                    lbs[k] = lb - half_diag
                    if lb + half_diag < ub:
                        far = fmax(
                            fmax(_seg_dist2(cx0, cy0, segs[k, 0], segs[k, 1], segs[k, 2], segs[k, 3]),
                                 _seg_dist2(cx1, cy0, segs[k, 0], segs[k, 1], segs[k, 2], segs[k, 3])),
                            fmax(_seg_dist2(cx0, cy1, segs[k, 0], segs[k, 1], segs[k, 2], segs[k, 3]),
                                 _seg_dist2(cx1, cy1, segs[k, 0], segs[k, 1], segs[k, 2], segs[k, 3])))
                        far = sqrt(far)
                        if far < ub:
                            ub = far
                ncand = 0
                for k in range(ns):
                    if lbs[k] <= ub:
                        cand[ncand] = k
                        ncand += 1
                for j in range(j0, j1):
                    for i in range(i0, i1):
                        best = INFINITY
                        for m in range(ncand):
                            k = cand[m]
                            d2 = _seg_dist2(xs[i], ys[j], segs[k, 0], segs[k, 1],
                                            segs[k, 2], segs[k, 3])
                            if d2 < best:
                                best = d2
                        out[j, i] = sqrt(best)
    return out_arr
