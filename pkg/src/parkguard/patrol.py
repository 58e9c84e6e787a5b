"""Patrol density fields normalised to a budget.

A strategy is a non-negative density psi on the protected region whose
integral equals the budget E. Units: psi * (time in transit) is treated as a
detection rate, so ``alpha * psi * B`` is an extra time-cost rate for an
extractor carrying benefit B.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import GridError, ScalarField, integrate


class PatrolError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class PatrolStrategy:
    psi: ScalarField
    budget: float
    kind: str = "custom"

    @property
    def grid(self):
        return self.psi.grid


def _finish(shape_vals, E, mask, kind):
    inside = mask.inside
    w = np.where(inside, shape_vals, 0.0)
    total = integrate(ScalarField(mask.grid, w), mask)
    if E == 0:
        return PatrolStrategy(ScalarField(mask.grid, np.zeros(mask.grid.shape)), 0.0, kind)
    if not total > 0:
        raise PatrolError("patrol shape integrates to zero over the region")
    psi = w * (E / total)
    return PatrolStrategy(ScalarField(mask.grid, psi), float(E), kind)


def none(mask):
    return PatrolStrategy(ScalarField(mask.grid, np.zeros(mask.grid.shape)), 0.0, "none")


def homogeneous(E, mask):
    """Uniform density ``E / A`` over the region."""
    if E < 0:
        raise PatrolError("budget must be non-negative")
    if mask.empty:
        raise PatrolError("empty region")
    A = mask.area()
    psi = np.where(mask.inside, E / A, 0.0)
    return PatrolStrategy(ScalarField(mask.grid, psi), float(E), "homogeneous")


def band_shape(depth, lo_frac, hi_frac):
    """Linear ramp in depth: 1 at ``lo_frac*d_m`` falling to 0 at ``hi_frac*d_m``."""
    if not 0 <= lo_frac < hi_frac <= 1:
        raise PatrolError("band fractions must satisfy 0 <= lo < hi <= 1")
    d_m = depth.d_max
    d = np.where(depth.T.nodata_mask, np.nan, depth.T.values)
    lo, hi = lo_frac * d_m, hi_frac * d_m
    with np.errstate(invalid="ignore"):
        inband = (d >= lo) & (d <= hi)
        w = np.where(inband, (hi - d) / ((hi_frac - lo_frac) * d_m), 0.0)
    return np.maximum(np.nan_to_num(w), 0.0)


def band(E, depth, lo_frac=0.3, hi_frac=0.7, mask=None):
    """Band patrol between two depth fractions, densest on the outer edge."""
    from .grid import DomainMask

    if E < 0:
        raise PatrolError("budget must be non-negative")
    if mask is None:
        mask = DomainMask(depth.grid, ~depth.T.nodata_mask)
    w = band_shape(depth, lo_frac, hi_frac)
    if not np.any(w[mask.inside] > 0):
        raise PatrolError("band contains no nodes")
    return _finish(w, E, mask, "band")


def from_raster(shape, E, mask):
    """Density proportional to ``shape`` inside the region, scaled to budget ``E``."""
    if shape.grid != mask.grid:
        raise GridError("patrol raster is not co-registered with the region grid")
    vals = np.where(shape.nodata_mask, 0.0, shape.values)
    if np.any(vals[mask.inside] < 0):
        raise PatrolError("patrol shape must be non-negative")
    if not np.any(vals[mask.inside] > 0):
        raise PatrolError("patrol shape is zero over the region")
    if E < 0:
        raise PatrolError("budget must be non-negative")
    return _finish(vals, E, mask, "raster")
