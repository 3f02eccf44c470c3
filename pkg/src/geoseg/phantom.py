"""Synthetic layered retina phantoms with exact ground-truth interfaces."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .trace import BOUNDARY_IDS

# Interface depths at the image flanks, as fractions of the image height.
DEFAULT_OFFSETS = (0.234, 0.293, 0.371, 0.418, 0.457, 0.586, 0.617, 0.656, 0.703)
# Foveal dip of each interface relative to the dip of B1.
DEFAULT_DIP_PROFILE = (1.0, 0.88, 0.72, 0.56, 0.40, 0.16, 0.08, 0.04, 0.0)
# Layer intensities from the vitreous down to the choroid. B1, B4, B6 and B7
# are dark-to-bright steps, the rest bright-to-dark. Steps inside the inner
# retina stay small next to the ILM step so that saturated weights still
# separate B1 from B4, yet large enough to survive TV denoising at 5% noise.
# The layer above the IS/OS line sits below its local mean so that the
# enhancement step suppresses it and B7 cannot settle on B6.
DEFAULT_INTENSITIES = (0.02, 0.57, 0.48, 0.39, 0.50, 0.41, 0.48, 1.00, 0.85, 0.55)


@dataclass(frozen=True)
class PhantomSpec:
    rows: int = 256
    cols: int = 512
    slices: int = 1
    offsets: tuple = DEFAULT_OFFSETS
    dip: float = 25.0
    dip_profile: tuple = DEFAULT_DIP_PROFILE
    dip_width: float = 40.0
    dip_center: float | None = None
    dip_slice_width: float | None = None  # None: same dip on every slice
    bump: float = 0.0
    bump_center: float | None = None
    bump_width: float = 20.0
    bump_profile: tuple = (0, 0, 0, 0, 0, 0, 0, 1, 1)
    intensities: tuple = DEFAULT_INTENSITIES
    attenuation: float = 30.0  # e-folding depth (px) of the signal below B9; 0 disables
    sigma: float = 0.0
    seed: int = 0
    extra: dict = field(default_factory=dict, compare=False)

    def interfaces(self) -> np.ndarray:
        """Interface depths, shape ``(9, slices, cols)``."""
        if len(self.offsets) != 9 or len(self.dip_profile) != 9 or len(self.bump_profile) != 9:
            raise ValueError("offsets, dip_profile and bump_profile need nine entries")
        if len(self.intensities) != 10:
            raise ValueError("intensities need ten layers")
        cols = np.arange(self.cols, dtype=np.float64)
        centre = (self.cols - 1) / 2 if self.dip_center is None else self.dip_center
        dip = np.exp(-0.5 * ((cols - centre) / self.dip_width) ** 2)
        ks = np.arange(self.slices, dtype=np.float64)
        if self.dip_slice_width is None:
            slice_gain = np.ones(self.slices)
        else:
            slice_gain = np.exp(-0.5 * ((ks - (self.slices - 1) / 2) / self.dip_slice_width) ** 2)
        bcentre = (self.cols - 1) / 2 if self.bump_center is None else self.bump_center
        bump = np.exp(-0.5 * ((cols - bcentre) / self.bump_width) ** 2)
        z = np.empty((9, self.slices, self.cols))
        for i in range(9):
            z[i] = (self.offsets[i] * self.rows
                    + self.dip * self.dip_profile[i] * slice_gain[:, None] * dip[None, :]
                    - self.bump * self.bump_profile[i] * bump[None, :])
        if np.any(np.diff(z, axis=0) <= 0):
            raise ValueError("interfaces must be strictly ordered from top to bottom")
        if z.min() < 0 or z.max() > self.rows - 1:
            raise ValueError("interfaces leave the image")
        return z


def render_layers(z: np.ndarray, intensities, rows: int) -> np.ndarray:
    """Piecewise-constant layers with partial-volume pixels.

    ``z`` has shape ``(9, ..., cols)``; pixel ``r`` covers depths ``[r-0.5, r+0.5]``.
    """
    v = np.asarray(intensities, dtype=np.float64)
    r = np.arange(rows, dtype=np.float64)
    shape = z.shape[1:-1] + (rows, z.shape[-1])
    img = np.full(shape, v[0])
    for i in range(9):
        below = np.clip(r[:, None] + 0.5 - z[i][..., None, :], 0.0, 1.0)
        img = img + (v[i + 1] - v[i]) * below
    return img


def make_phantom(spec: PhantomSpec = PhantomSpec()):
    """Render ``spec``; returns ``(image, truth)``.

    The image is ``(rows, cols)`` for one slice and ``(slices, rows, cols)``
    otherwise. ``truth`` maps ``B1..B9`` to the generating depths with the same
    leading shape. Below B9 the signal decays exponentially with depth, as
    in tissue. Noise is additive Gaussian, clipped to [0, 1].
    """
    z = spec.interfaces()
    img = render_layers(z, spec.intensities, spec.rows)
    if spec.attenuation > 0:
        depth = np.arange(spec.rows, dtype=np.float64)[:, None] - z[-1][..., None, :]
        img = img * np.exp(-np.maximum(depth, 0.0) / spec.attenuation)
    if spec.sigma > 0:
        rng = np.random.default_rng(spec.seed)
        img = np.clip(img + rng.normal(0.0, spec.sigma, img.shape), 0.0, 1.0)
    if spec.slices == 1:
        return img[0], {b: z[i, 0].copy() for i, b in enumerate(BOUNDARY_IDS)}
    return img, {b: z[i].copy() for i, b in enumerate(BOUNDARY_IDS)}
