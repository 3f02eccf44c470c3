"""Signed/absolute error and Hausdorff distance between boundaries."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import directed_hausdorff

from .trace import BOUNDARY_IDS, BoundaryCurve

HD_MODES = ("pixel", "axis")


def _depths(b):
    return b.depths if isinstance(b, BoundaryCurve) else np.asarray(b, dtype=np.float64)


def _pair(b, g):
    b = _depths(b)
    g = _depths(g)
    if b.shape != g.shape:
        raise ValueError(f"shape mismatch {b.shape} vs {g.shape}")
    if b.size == 0:
        raise ValueError("empty boundary")
    return b, g


def signed_error(b, g) -> float:
    """Mean of ``b - g`` over columns (and slices)."""
    b, g = _pair(b, g)
    return float(np.mean(b - g))


def absolute_error(b, g) -> float:
    b, g = _pair(b, g)
    return float(np.mean(np.abs(b - g)))


def _points(depths, row_pitch, col_pitch, slice_pitch):
    depths = np.atleast_2d(depths)
    k, c = np.indices(depths.shape, dtype=np.float64)
    return np.column_stack([k.ravel() * slice_pitch, c.ravel() * col_pitch, depths.ravel() * row_pitch])


def hausdorff(b, g, row_pitch: float = 1.0, col_pitch: float = 1.0, slice_pitch: float = 1.0) -> float:
    """Symmetric Hausdorff distance between the (column, depth) point sets.

    Surfaces of shape ``(slices, cols)`` add the slice index as a third axis.
    """
    b = _depths(b)
    g = _depths(g)
    if b.size == 0 or g.size == 0:
        raise ValueError("empty boundary")
    pb = _points(b, row_pitch, col_pitch, slice_pitch)
    pg = _points(g, row_pitch, col_pitch, slice_pitch)
    return float(max(directed_hausdorff(pb, pg)[0], directed_hausdorff(pg, pb)[0]))


@dataclass(frozen=True)
class BoundaryMetrics:
    id: str
    se: float
    ae: float
    hd: float


@dataclass(frozen=True)
class MetricsRecord:
    boundaries: tuple  # BoundaryMetrics, B1..B9 order
    ose: float
    oae: float
    ohd: float
    scale: float = 1.0

    def rows(self):
        """CSV rows ``(boundary, se, ae, hd)`` ending with the overall row."""
        out = [(m.id, m.se, m.ae, m.hd) for m in self.boundaries]
        out.append(("overall", self.ose, self.oae, self.ohd))
        return out


def overall(records) -> tuple:
    """Means of se, ae and hd over per-boundary records."""
    records = list(records)
    if not records:
        raise ValueError("no boundaries to aggregate")
    return tuple(float(np.mean([getattr(r, k) for r in records])) for k in ("se", "ae", "hd"))


def evaluate(detected: dict, truth: dict, scale: float = 1.0, hd_mode: str = "pixel",
             col_pitch: float | None = None) -> MetricsRecord:
    """Compare boundaries present in both mappings.

    ``scale`` converts pixels to physical units (e.g. 3.3 um per row). With
    ``hd_mode="pixel"`` the Hausdorff distance is measured in pixels and then
    multiplied by ``scale``; with ``"axis"`` rows are scaled by ``scale`` and
    columns by ``col_pitch`` (default ``scale``) before measuring.
    """
    if hd_mode not in HD_MODES:
        raise ValueError(f"hd_mode must be one of {HD_MODES}")
    if not scale > 0:
        raise ValueError("scale must be positive")
    ids = [b for b in BOUNDARY_IDS if b in detected and b in truth]
    ids += sorted(set(detected) & set(truth) - set(ids))
    if not ids:
        raise ValueError("no common boundaries")
    recs = []
    for b in ids:
        d, t = detected[b], truth[b]
        if hd_mode == "pixel":
            hd = hausdorff(d, t) * scale
        else:
            cp = scale if col_pitch is None else col_pitch
            hd = hausdorff(d, t, row_pitch=scale, col_pitch=cp)
        recs.append(BoundaryMetrics(b, signed_error(d, t) * scale, absolute_error(d, t) * scale, hd))
    ose, oae, ohd = overall(recs)
    return MetricsRecord(tuple(recs), ose, oae, ohd, scale)
