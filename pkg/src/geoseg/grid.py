"""Dense scalar fields and the finite-difference stencils used on them.

Grids are plain ``numpy`` float64 arrays. A 2D grid has shape ``(rows, cols)``
with rows increasing downward; a 3D grid has shape ``(slices, rows, cols)``.
All stencils replicate the border sample (Neumann condition).
"""

from __future__ import annotations

import numpy as np
from scipy.ndimage import uniform_filter


def as_grid(data, ndim: int = 2) -> np.ndarray:
    """Validate ``data`` as a finite, non-empty float64 grid of ``ndim`` axes."""
    arr = np.asarray(data, dtype=np.float64)
    if arr.ndim != ndim:
        raise ValueError(f"expected a {ndim}D grid, got shape {arr.shape}")
    if arr.size == 0 or min(arr.shape) < 1:
        raise ValueError("grid must be non-empty")
    if not np.all(np.isfinite(arr)):
        raise ValueError("grid contains non-finite values")
    return arr


def _central_difference(img: np.ndarray, axis: int) -> np.ndarray:
    padded = np.pad(img, [(1, 1) if a == axis else (0, 0) for a in range(img.ndim)], mode="edge")
    n = img.shape[axis]
    upper = np.take(padded, np.arange(2, n + 2), axis=axis)
    lower = np.take(padded, np.arange(0, n), axis=axis)
    return (upper - lower) / 2.0


def gradient_x(img) -> np.ndarray:
    """Vertical derivative dI/drow (central difference, replicated border)."""
    img = np.asarray(img, dtype=np.float64)
    return _central_difference(img, img.ndim - 2)


def gradient_y(img) -> np.ndarray:
    """Horizontal derivative dI/dcol (central difference, replicated border)."""
    img = np.asarray(img, dtype=np.float64)
    return _central_difference(img, img.ndim - 1)


def gradient_z(vol) -> np.ndarray:
    """Cross-slice derivative of a ``(slices, rows, cols)`` volume."""
    vol = np.asarray(vol, dtype=np.float64)
    if vol.ndim != 3:
        raise ValueError("gradient_z needs a 3D volume")
    return _central_difference(vol, 0)


def linear_stretch(field, region=None) -> np.ndarray:
    """Affinely map ``field`` onto [0, 1].

    The extremes are taken over ``region`` (a boolean mask) when given, in which
    case values outside the region are clipped to [0, 1]. A constant field (or
    region) maps to all zeros.
    """
    field = np.asarray(field, dtype=np.float64)
    values = field if region is None else field[np.asarray(region, dtype=bool)]
    if values.size == 0:
        raise ValueError("linear_stretch region is empty")
    lo = values.min()
    hi = values.max()
    if hi <= lo:
        return np.zeros_like(field)
    out = (field - lo) / (hi - lo)
    if region is not None:
        np.clip(out, 0.0, 1.0, out=out)
    return out


def mean_filter(img, ws: int) -> np.ndarray:
    """Mean over a ``ws x ws`` window with replicated borders.

    Even windows span ``ws // 2`` samples before the centre and
    ``ws - 1 - ws // 2`` after it.
    """
    ws = int(ws)
    if ws < 1:
        raise ValueError("window size must be >= 1")
    img = np.asarray(img, dtype=np.float64)
    return uniform_filter(img, size=ws, mode="nearest")
