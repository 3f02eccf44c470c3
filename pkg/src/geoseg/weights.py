"""Polarity-specific edge weights, endpoint padding and search-region masking."""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace

import numpy as np

from .grid import as_grid, gradient_x, gradient_y, linear_stretch


class Polarity(enum.Enum):
    DARK_TO_BRIGHT = "db"
    BRIGHT_TO_DARK = "bd"


class Strategy(enum.Enum):
    LITERAL = "literal"
    ADDITIVE = "additive"
    VERTICAL = "vertical"


@dataclass(frozen=True)
class WeightStrategy:
    kind: Strategy = Strategy.ADDITIVE
    lam: float = 10.0

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError("lambda must be positive")


@dataclass(frozen=True)
class WeightField:
    weights: np.ndarray
    polarity: Polarity
    padded: bool = False
    pad_value: float = 0.0

    @property
    def shape(self):
        return self.weights.shape


def exponential_weight(img, polarity: Polarity, strategy: WeightStrategy = WeightStrategy(),
                       region=None, transverse=None) -> WeightField:
    """Exponential edge weight of ``img`` for one boundary polarity.

    The vertical response ``a = 1 - n(-dI/drow)`` is high at dark-above-bright
    transitions; the transverse response ``h = n(|dI/dcol|)`` enters according to
    ``strategy``. ``region`` restricts the pixels that set the stretch extremes.
    ``transverse`` replaces ``|dI/dcol|`` (volumes pass a combined in-plane and
    cross-slice magnitude).
    """
    img = as_grid(img)
    a = 1.0 - linear_stretch(-gradient_x(img), region)
    if strategy.kind is Strategy.VERTICAL:
        response = a
    else:
        trans = np.abs(gradient_y(img)) if transverse is None else np.asarray(transverse, dtype=np.float64)
        if trans.shape != img.shape:
            raise ValueError("transverse gradient shape mismatch")
        h = linear_stretch(trans, region)
        response = a * h if strategy.kind is Strategy.LITERAL else a * (1.0 + h)
    decay = np.exp(-strategy.lam * response)
    w = 1.0 - decay if polarity is Polarity.DARK_TO_BRIGHT else decay
    return WeightField(w, polarity)


def pad_endpoint_columns(w: WeightField, w_max: float = 2.0):
    """Add a constant ``w_max`` column on each side and place the two seeds there.

    Returns ``(padded_field, s1, s2)`` with seeds on the middle row of the new
    left and right columns.
    """
    if w.padded:
        raise ValueError("weight field is already padded")
    interior = w.weights
    if not w_max > interior.max():
        raise ValueError(f"w_max={w_max} must exceed the largest interior weight {interior.max()}")
    rows, cols = interior.shape
    out = np.empty((rows, cols + 2))
    out[:, 1:-1] = interior
    out[:, 0] = w_max
    out[:, -1] = w_max
    mid = rows // 2
    return replace(w, weights=out, padded=True, pad_value=float(w_max)), (mid, 0), (mid, cols + 1)


def strip_padding(obj):
    """Drop the padded endpoint columns from a weight field or boundary curve."""
    if not getattr(obj, "padded", False):
        raise ValueError("object is not padded")
    if isinstance(obj, WeightField):
        return replace(obj, weights=obj.weights[:, 1:-1].copy(), padded=False, pad_value=0.0)
    return replace(obj, depths=obj.depths[1:-1].copy(), padded=False)


def check_region(mask, shape) -> np.ndarray:
    """Validate a search-region mask: right shape and a true cell in every column."""
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != tuple(shape):
        raise ValueError(f"mask shape {mask.shape} does not match {tuple(shape)}")
    if not mask.any(axis=0).all():
        raise ValueError("region mask has an empty column")
    return mask


def apply_mask(w: WeightField, mask) -> WeightField:
    """Zero the weights outside ``mask``; padded columns are never masked."""
    if w.padded:
        rows, cols = w.shape
        mask = check_region(mask, (rows, cols - 2))
        full = np.ones(w.shape, dtype=bool)
        full[:, 1:-1] = mask
    else:
        full = check_region(mask, w.shape)
    return replace(w, weights=np.where(full, w.weights, 0.0))
