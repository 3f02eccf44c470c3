"""Minimal-path extraction by normalised gradient descent on a distance map."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import map_coordinates

from .eikonal import DistanceMap
from .grid import gradient_x, gradient_y

BOUNDARY_IDS = tuple(f"B{i}" for i in range(1, 10))
STENCILS = ("upwind", "central")


def upwind_gradient(d: np.ndarray):
    """Per-axis slope towards the smaller neighbour; zero where both are higher.

    This is the difference the Godunov update itself uses, so at the bottom of
    a one-pixel valley the across-valley component vanishes instead of
    pointing into the steeper wall.
    """
    grads = []
    for axis in range(d.ndim):
        p = np.pad(d, [(1, 1) if a == axis else (0, 0) for a in range(d.ndim)], mode="edge")
        lo = np.take(p, np.arange(0, d.shape[axis]), axis=axis)
        hi = np.take(p, np.arange(2, d.shape[axis] + 2), axis=axis)
        back = d - lo
        fwd = hi - d
        g = np.where(lo <= hi, back, fwd)
        g = np.where(np.minimum(lo, hi) >= d, 0.0, g)
        grads.append(g)
    return grads


@dataclass(frozen=True)
class BoundaryCurve:
    """One depth (fractional row) per column for a named interface."""

    id: str
    depths: np.ndarray
    padded: bool = False

    def __post_init__(self):
        depths = np.asarray(self.depths, dtype=np.float64)
        if depths.ndim != 1 or depths.size == 0:
            raise ValueError("depths must be a non-empty 1D array")
        if not np.all(np.isfinite(depths)):
            raise ValueError(f"{self.id}: non-finite depth")
        object.__setattr__(self, "depths", depths)

    @property
    def width(self) -> int:
        return self.depths.size


@dataclass(frozen=True)
class TraceParams:
    tau: float = 0.8
    epsilon: float = 1e-8
    stop_radius: float = 1.0
    max_steps: int | None = None
    gradient: str = "upwind"  # or "central"

    def __post_init__(self):
        if not (self.tau > 0 and self.epsilon > 0 and self.stop_radius > 0):
            raise ValueError("tau, epsilon and stop_radius must be positive")
        if self.gradient not in STENCILS:
            raise ValueError(f"gradient must be one of {STENCILS}")


@dataclass
class GeodesicPath:
    points: np.ndarray  # (n, 2) rows of (row, col), starting at the end seed
    reached_seed: bool
    steps: int


class _GradientSampler:
    def __init__(self, d: np.ndarray, stencil: str = "central", epsilon: float = 1e-8):
        if stencil == "upwind":
            self.gr, self.gc = upwind_gradient(d)
        else:
            self.gr = gradient_x(d)
            self.gc = gradient_y(d)
        self.epsilon = epsilon
        self._unit = None
        self.d = d
        self.rows, self.cols = d.shape

    def clamp(self, r, c):
        return min(max(r, 0.0), self.rows - 1.0), min(max(c, 0.0), self.cols - 1.0)

    def _bilinear(self, field, r, c):
        r0 = min(int(r), self.rows - 2) if self.rows > 1 else 0
        c0 = min(int(c), self.cols - 2) if self.cols > 1 else 0
        fr = r - r0
        fc = c - c0
        r1 = min(r0 + 1, self.rows - 1)
        c1 = min(c0 + 1, self.cols - 1)
        top = field[r0, c0] * (1 - fc) + field[r0, c1] * fc
        bottom = field[r1, c0] * (1 - fc) + field[r1, c1] * fc
        return top * (1 - fr) + bottom * fr

    def gradient(self, r, c):
        r, c = self.clamp(r, c)
        return self._bilinear(self.gr, r, c), self._bilinear(self.gc, r, c)

    def direction(self, r, c):
        """Normalised gradient field sampled at (r, c), minus any outward component.

        Normalising at the grid nodes before interpolating keeps the direction
        stable inside valleys far steeper across than along.
        """
        if self._unit is None:
            norm = np.hypot(self.gr, self.gc) + self.epsilon
            self._unit = (self.gr / norm, self.gc / norm)
        r, c = self.clamp(r, c)
        gr = self._bilinear(self._unit[0], r, c)
        gc = self._bilinear(self._unit[1], r, c)
        if (r <= 0.0 and gr > 0) or (r >= self.rows - 1.0 and gr < 0):
            gr = 0.0
        if (c <= 0.0 and gc > 0) or (c >= self.cols - 1.0 and gc < 0):
            gc = 0.0
        return gr, gc

    def value(self, r, c):
        r, c = self.clamp(r, c)
        return self._bilinear(self.d, r, c)


def sample_gradient(dist, point, stencil: str = "central") -> np.ndarray:
    """Bilinearly interpolated gradient of a 2D map (central differences by default).

    Points outside the grid are clamped onto it.
    """
    d = dist.d if isinstance(dist, DistanceMap) else np.asarray(dist, dtype=np.float64)
    return np.array(_GradientSampler(d, stencil).gradient(float(point[0]), float(point[1])))


def sample_value(dist, points) -> np.ndarray:
    """Bilinear samples of the map at sub-pixel ``points``."""
    d = dist.d if isinstance(dist, DistanceMap) else np.asarray(dist, dtype=np.float64)
    sampler = _GradientSampler(d)
    return np.array([sampler.value(float(r), float(c)) for r, c in np.atleast_2d(points)])


def backtrack(dist: DistanceMap, s2, s1, params: TraceParams = TraceParams()) -> GeodesicPath:
    """Descend ``dist`` from ``s2`` with unit steps of length ``tau`` until ``s1``.

    Each step moves against ``grad d / (|grad d| + epsilon)``, evaluated at
    the grid nodes with the ``params.gradient`` stencil and interpolated
    bilinearly, so no step is longer than ``tau``. On the grid border the
    outward component is dropped and the walk slides along it. The walk ends
    when it comes within ``stop_radius`` of ``s1`` (which is then appended) or
    after ``max_steps``.
    """
    if not dist.converged:
        raise ValueError("distance map did not converge")
    sampler = _GradientSampler(dist.d, params.gradient, params.epsilon)
    rows, cols = dist.d.shape
    max_steps = params.max_steps
    if max_steps is None:
        max_steps = int(math.ceil(20 * (rows + cols) / params.tau))
    tr, tc = float(s1[0]), float(s1[1])
    r, c = float(s2[0]), float(s2[1])
    points = [(r, c)]
    reached = math.hypot(r - tr, c - tc) <= params.stop_radius
    steps = 0
    while not reached and steps < max_steps:
        gr, gc = sampler.direction(r, c)
        r, c = sampler.clamp(r - params.tau * gr, c - params.tau * gc)
        steps += 1
        points.append((r, c))
        reached = math.hypot(r - tr, c - tc) <= params.stop_radius
    if reached and points[-1] != (tr, tc):
        points.append((tr, tc))
    return GeodesicPath(np.array(points), reached, steps)


def backtrack_3d(dist: DistanceMap, start, targets, params: TraceParams = TraceParams()) -> GeodesicPath:
    """Descend a 3D distance volume from ``start`` until within ``stop_radius`` of any target.

    Same walk as :func:`backtrack` with trilinear sampling of the node-normalised
    upwind gradient. Points are ``(slice, row, col)``.
    """
    if not dist.converged:
        raise ValueError("distance map did not converge")
    d = dist.d
    if d.ndim != 3:
        raise ValueError("backtrack_3d needs a 3D distance map")
    grads = upwind_gradient(d)
    norm = np.sqrt(sum(g * g for g in grads)) + params.epsilon
    unit = [g / norm for g in grads]
    hi = np.array(d.shape, dtype=np.float64) - 1.0
    targets = np.atleast_2d(np.asarray(targets, dtype=np.float64))
    max_steps = params.max_steps
    if max_steps is None:
        max_steps = int(math.ceil(20 * sum(d.shape) / params.tau))

    def near(p):
        dists = np.sqrt(((targets - p) ** 2).sum(axis=1))
        i = int(np.argmin(dists))
        return dists[i] <= params.stop_radius, targets[i]

    p = np.clip(np.asarray(start, dtype=np.float64), 0.0, hi)
    points = [p]
    reached, hit = near(p)
    steps = 0
    while not reached and steps < max_steps:
        g = np.array([map_coordinates(u, p[:, None], order=1, mode="nearest")[0] for u in unit])
        g[((p <= 0.0) & (g > 0)) | ((p >= hi) & (g < 0))] = 0.0
        p = np.clip(p - params.tau * g, 0.0, hi)
        steps += 1
        points.append(p)
        reached, hit = near(p)
    if reached and not np.array_equal(points[-1], hit):
        points.append(hit)
    return GeodesicPath(np.array(points), reached, steps)


def path_to_boundary(path: GeodesicPath, cols: int, id: str = "B?", padded: bool = False) -> BoundaryCurve:
    """Rasterise a sub-pixel path to one depth per column.

    Each column takes the mean row of the path points that round to it; empty
    columns are linearly interpolated and the ends are held flat.
    """
    pts = np.asarray(path.points, dtype=np.float64)[:, -2:]
    if pts.size == 0:
        raise ValueError("empty path")
    col_idx = np.floor(pts[:, 1] + 0.5).astype(np.int64)
    keep = (col_idx >= 0) & (col_idx < cols)
    if not keep.any():
        raise ValueError("path covers no column")
    counts = np.bincount(col_idx[keep], minlength=cols)
    sums = np.bincount(col_idx[keep], weights=pts[keep, 0], minlength=cols)
    covered = np.flatnonzero(counts)
    depths = np.interp(np.arange(cols), covered, sums[covered] / counts[covered])
    return BoundaryCurve(id, depths, padded)
