"""Nine-boundary layer segmentation built on single-boundary geodesic detection."""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .denoise import TVParams, tv_denoise
from .eikonal import solve_2d, solve_3d, speed_inverse
from .grid import as_grid, gradient_y, gradient_z, mean_filter
from .trace import (BOUNDARY_IDS, BoundaryCurve, TraceParams, backtrack, backtrack_3d,
                    path_to_boundary)
from .weights import (Polarity, Strategy, WeightStrategy, apply_mask,
                      check_region, exponential_weight, pad_endpoint_columns,
                      strip_padding)

log = logging.getLogger(__name__)

DB = Polarity.DARK_TO_BRIGHT
BD = Polarity.BRIGHT_TO_DARK


class SegmentationError(RuntimeError):
    def __init__(self, stage: str, message: str, slice_index: int | None = None):
        where = stage if slice_index is None else f"{stage} (slice {slice_index})"
        super().__init__(f"{where}: {message}")
        self.stage = stage
        self.slice_index = slice_index


@dataclass(frozen=True)
class PipelineParams:
    lam: float = 10.0
    tau: float = 0.8
    ws: int = 100
    C: float = 0.01
    band_onl_is: int = 15
    band_ipl_inl: int = 20
    strategy: Strategy = Strategy.ADDITIVE
    w_max: float = 1000.0
    margin: float = 2.0
    region_stretch: bool = True
    tol: float = 1e-6
    max_cycles: int = 50
    epsilon: float = 1e-8
    stop_radius: float = 1.0
    denoise: bool = True
    tv_mu: float = 15.0
    tv_iterations: int = 30

    def __post_init__(self):
        positive = (self.lam, self.tau, self.ws, self.C, self.w_max, self.tol,
                    self.max_cycles, self.epsilon, self.stop_radius, self.tv_mu, self.tv_iterations)
        if not all(v > 0 for v in positive):
            raise ValueError("pipeline parameters must be positive")
        if self.band_onl_is < 1 or self.band_ipl_inl < 1 or self.margin < 0:
            raise ValueError("bands must be >= 1 and margin >= 0")
        if self.w_max <= 1.0:
            raise ValueError("w_max must exceed every weight (> 1)")

    @property
    def weight_strategy(self) -> WeightStrategy:
        return WeightStrategy(self.strategy, self.lam)

    @property
    def trace_params(self) -> TraceParams:
        return TraceParams(self.tau, self.epsilon, self.stop_radius)


@dataclass
class SegmentationResult:
    boundaries: dict
    params: PipelineParams
    diagnostics: dict = field(default_factory=dict)

    def depths(self) -> np.ndarray:
        """Depths stacked as ``(9, cols)`` in B1..B9 order."""
        return np.stack([self.boundaries[b].depths for b in BOUNDARY_IDS])


# ---------------------------------------------------------------------------
# Region masks
# ---------------------------------------------------------------------------

def _as_depths(ref):
    return ref.depths if isinstance(ref, BoundaryCurve) else np.asarray(ref, dtype=np.float64)


def band_mask(ref, above: float, below: float, dims) -> np.ndarray:
    """Rows within ``[depth - above, depth + below]`` of ``ref``, clipped to the grid."""
    if above + below < 1:
        raise ValueError("band must span at least one row")
    rows, cols = dims
    depth = _as_depths(ref)
    if depth.size != cols:
        raise ValueError("reference width does not match dims")
    lo = np.clip(np.ceil(depth - above - 1e-9), 0, rows - 1)
    hi = np.clip(np.floor(depth + below + 1e-9), 0, rows - 1)
    r = np.arange(rows)[:, None]
    return (r >= lo[None, :]) & (r <= hi[None, :])


def between_mask(upper, lower, dims) -> np.ndarray:
    """Rows from ``upper`` to ``lower`` inclusive; a single midpoint row where no row fits."""
    rows, cols = dims
    u = _as_depths(upper)
    lw = _as_depths(lower)
    if u.size != cols or lw.size != cols:
        raise ValueError("reference width does not match dims")
    if np.any(u > lw + 1e-9):
        raise ValueError("upper reference crosses below the lower one")
    lo = np.clip(np.ceil(u - 1e-9), 0, rows - 1)
    hi = np.clip(np.floor(lw + 1e-9), 0, rows - 1)
    empty = lo > hi
    mid = np.clip(np.floor((u + lw) / 2 + 0.5), 0, rows - 1)
    lo = np.where(empty, mid, lo)
    hi = np.where(empty, mid, hi)
    r = np.arange(rows)[:, None]
    return (r >= lo[None, :]) & (r <= hi[None, :])


def clip_rnflo(b2: BoundaryCurve, b1: BoundaryCurve) -> BoundaryCurve:
    """Push RNFL_o points that rose above the ILM back onto it."""
    if b2.width != b1.width:
        raise ValueError("boundary widths differ")
    return replace(b2, depths=np.maximum(b2.depths, b1.depths))


def _inset(upper, lower, margin):
    """Move two references towards each other by ``margin`` without crossing."""
    mid = (upper + lower) / 2
    return np.minimum(upper + margin, mid), np.maximum(lower - margin, mid)


def _clip_rows(depth, rows):
    return np.clip(depth, 0.0, rows - 1.0)


# ---------------------------------------------------------------------------
# Single boundary
# ---------------------------------------------------------------------------

def enhance_isos(img, ws: int = 100, C: float = 0.01) -> np.ndarray:
    """Zero every pixel darker than its local mean by more than ``C``."""
    img = as_grid(img, np.ndim(img))
    local = mean_filter(img, ws) if img.ndim == 2 else np.stack([mean_filter(s, ws) for s in img])
    return np.where(local - img > C, 0.0, img)


@dataclass
class _Stage:
    id: str
    polarity: Polarity
    enhanced: bool


# Detection order; each stage's region depends only on earlier stages.
SCHEDULE = (
    _Stage("B7", DB, True),
    _Stage("B9", BD, False),
    _Stage("B8", BD, False),
    _Stage("B6", DB, False),
    _Stage("B1", DB, False),
    _Stage("B4", DB, False),
    _Stage("B5", BD, False),
    _Stage("B3", BD, False),
    _Stage("B2", BD, False),
)


def stage_region(stage_id: str, found: dict, dims, params: PipelineParams) -> np.ndarray:
    """Search region of one stage given the depths found so far."""
    rows, cols = dims
    m = params.margin
    if stage_id == "B7":
        return np.ones(dims, dtype=bool)
    if stage_id == "B9":
        return band_mask(_clip_rows(found["B7"] + m, rows), 0, rows, dims)
    if stage_id == "B8":
        return between_mask(*_inset(found["B7"], found["B9"], m), dims)
    if stage_id == "B6":
        shift = min(m, params.band_onl_is - 1)
        return band_mask(_clip_rows(found["B7"] - shift, rows), params.band_onl_is - shift, 0, dims)
    if stage_id == "B1":
        return band_mask(_clip_rows(found["B6"] - m, rows), rows, 0, dims)
    if stage_id == "B4":
        return between_mask(*_inset(found["B1"], found["B6"], m), dims)
    if stage_id == "B5":
        return between_mask(*_inset(found["B4"], found["B6"], m), dims)
    if stage_id == "B3":
        shift = min(m, params.band_ipl_inl - 1)
        return band_mask(_clip_rows(found["B4"] - shift, rows), params.band_ipl_inl - shift, 0, dims)
    if stage_id == "B2":
        return between_mask(*_inset(found["B1"], found["B3"], m), dims)
    raise KeyError(stage_id)


def _padded_cost(img, polarity, mask, params, transverse):
    region = mask if params.region_stretch else None
    w = exponential_weight(img, polarity, params.weight_strategy, region=region, transverse=transverse)
    w = apply_mask(w, mask)
    padded, s1, s2 = pad_endpoint_columns(w, params.w_max)
    return speed_inverse(padded.weights), s1, s2


def _trace_curve(dist, s1, s2, cols, params, stage_id):
    path = backtrack(dist, s2, s1, params.trace_params)
    if not path.reached_seed:
        raise SegmentationError(stage_id, f"path did not reach the seed after {path.steps} steps")
    curve = strip_padding(path_to_boundary(path, cols + 2, stage_id, padded=True))
    return curve, path


def detect_boundary(img, polarity: Polarity, mask=None, params: PipelineParams = PipelineParams(),
                    transverse=None, id: str = "B?"):
    """Find one boundary: weight, mask, pad, solve, backtrack, unpad, rasterise.

    Returns ``(curve, diagnostics)``. Raises :class:`SegmentationError` when the
    distance map does not converge or the path misses the seed.
    """
    img = as_grid(img)
    mask = np.ones(img.shape, dtype=bool) if mask is None else check_region(mask, img.shape)
    f, s1, s2 = _padded_cost(img, polarity, mask, params, transverse)
    dist = solve_2d(f, s1, params.tol, params.max_cycles)
    if not dist.converged:
        raise SegmentationError(id, f"fast sweeping did not converge in {dist.cycles} cycles")
    curve, path = _trace_curve(dist, s1, s2, img.shape[1], params, id)
    diag = {"reached_seed": path.reached_seed, "steps": path.steps,
            "cycles": dist.cycles, "sweeps_used": dist.sweeps_used}
    return curve, diag


# ---------------------------------------------------------------------------
# Nine boundaries
# ---------------------------------------------------------------------------

def _prepare(img, params):
    if params.denoise:
        img = tv_denoise(img, TVParams(params.tv_mu, params.tv_iterations))
    return img


def _check_ordering(depths: dict, stage="ordering"):
    stacked = np.stack([depths[b] for b in BOUNDARY_IDS])
    bad = np.diff(stacked, axis=0) < -1e-9
    if bad.any():
        i, col = np.argwhere(bad)[0]
        raise SegmentationError(stage, f"{BOUNDARY_IDS[i]} lies below {BOUNDARY_IDS[i + 1]} at column {col}")


def _segment_prepared(img, enhanced, trans, trans_enh, params):
    dims = img.shape
    found = {}
    curves = {}
    diagnostics = {}
    for stage in SCHEDULE:
        mask = stage_region(stage.id, found, dims, params)
        source = enhanced if stage.enhanced else img
        transverse = trans_enh if stage.enhanced else trans
        curve, diag = detect_boundary(source, stage.polarity, mask, params, transverse, stage.id)
        if stage.id == "B2":
            curve = clip_rnflo(curve, curves["B1"])
        curves[stage.id] = curve
        found[stage.id] = curve.depths
        diagnostics[stage.id] = diag
        log.debug("%s: %s", stage.id, diag)
    _check_ordering(found)
    boundaries = {b: curves[b] for b in BOUNDARY_IDS}
    return SegmentationResult(boundaries, params, diagnostics)


def segment_bscan(img, params: PipelineParams = PipelineParams()) -> SegmentationResult:
    """Delineate B1..B9 on one normalised B-scan."""
    img = _prepare(as_grid(img), params)
    enhanced = enhance_isos(img, params.ws, params.C)
    return _segment_prepared(img, enhanced, np.abs(gradient_y(img)), np.abs(gradient_y(enhanced)), params)


def _volume_inputs(vol, params):
    vol = np.stack([_prepare(s, params) for s in vol])
    enhanced = enhance_isos(vol, params.ws, params.C)
    trans = np.hypot(gradient_y(vol), gradient_z(vol))
    trans_enh = np.hypot(gradient_y(enhanced), gradient_z(enhanced))
    return vol, enhanced, trans, trans_enh


def _sheets(results):
    return {b: np.stack([r.boundaries[b].depths for r in results]) for b in BOUNDARY_IDS}


def segment_volume(vol, params: PipelineParams = PipelineParams(), mode: str = "2d", threads: int = 1):
    """Segment every slice of a ``(slices, rows, cols)`` volume.

    Weights use the combined in-plane and cross-slice transverse gradient. In
    ``"2d"`` mode each slice runs the B-scan schedule independently; ``"3d"``
    solves one distance volume per boundary (experimental). Returns
    ``(results, sheets)`` where ``sheets`` maps B1..B9 to ``(slices, cols)``.
    """
    vol = as_grid(vol, 3)
    vol, enhanced, trans, trans_enh = _volume_inputs(vol, params)
    if mode == "3d":
        results = _segment_volume_3d(vol, enhanced, trans, trans_enh, params)
        return results, _sheets(results)
    if mode != "2d":
        raise ValueError(f"unknown volume mode {mode!r}")

    def run(k):
        try:
            return _segment_prepared(vol[k], enhanced[k], trans[k], trans_enh[k], params)
        except SegmentationError as err:
            raise SegmentationError(err.stage, str(err).split(": ", 1)[-1], k) from err

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            results = list(pool.map(run, range(vol.shape[0])))
    else:
        results = [run(k) for k in range(vol.shape[0])]
    return results, _sheets(results)


def _segment_volume_3d(vol, enhanced, trans, trans_enh, params):
    slices, rows, cols = vol.shape
    found = [dict() for _ in range(slices)]
    curves = [dict() for _ in range(slices)]
    diagnostics = [dict() for _ in range(slices)]
    for stage in SCHEDULE:
        source = enhanced if stage.enhanced else vol
        transverse = trans_enh if stage.enhanced else trans
        costs = []
        for k in range(slices):
            mask = stage_region(stage.id, found[k], (rows, cols), params)
            f, s1, s2 = _padded_cost(source[k], stage.polarity, mask, params, transverse[k])
            costs.append(f)
        seeds = [(k,) + s1 for k in range(slices)]
        dist = solve_3d(np.stack(costs), seeds, params.tol, params.max_cycles)
        if not dist.converged:
            raise SegmentationError(stage.id, f"3D fast sweeping did not converge in {dist.cycles} cycles")
        for k in range(slices):
            path = backtrack_3d(dist, (k,) + s2, seeds, params.trace_params)
            if not path.reached_seed:
                raise SegmentationError(stage.id, f"path did not reach the seed line after {path.steps} steps", k)
            curve = strip_padding(path_to_boundary(path, cols + 2, stage.id, padded=True))
            if stage.id == "B2":
                curve = clip_rnflo(curve, curves[k]["B1"])
            curves[k][stage.id] = curve
            found[k][stage.id] = curve.depths
            diagnostics[k][stage.id] = {"reached_seed": True, "steps": path.steps,
                                        "cycles": dist.cycles, "sweeps_used": dist.sweeps_used}
    results = []
    for k in range(slices):
        _check_ordering(found[k])
        results.append(SegmentationResult({b: curves[k][b] for b in BOUNDARY_IDS}, params, diagnostics[k]))
    return results
