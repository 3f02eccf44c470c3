"""Geodesic-distance segmentation of layered boundaries in 2D scans and 3D volumes."""

from .baseline import chiu_edge_weight, dijkstra_boundary
from .denoise import TVParams, tv_denoise
from .eikonal import (DistanceMap, godunov_update_2d, godunov_update_3d, residual,
                      solve_2d, solve_3d, speed_inverse)
from .grid import gradient_x, gradient_y, gradient_z, linear_stretch, mean_filter
from .metrics import absolute_error, evaluate, hausdorff, overall, signed_error
from .phantom import PhantomSpec, make_phantom
from .pipeline import (PipelineParams, SegmentationError, SegmentationResult, band_mask,
                       between_mask, clip_rnflo, detect_boundary, enhance_isos,
                       segment_bscan, segment_volume)
from .trace import (BOUNDARY_IDS, BoundaryCurve, GeodesicPath, TraceParams, backtrack, backtrack_3d,
                    path_to_boundary, sample_gradient)
from .weights import (Polarity, Strategy, WeightField, WeightStrategy, apply_mask,
                      exponential_weight, pad_endpoint_columns, strip_padding)

__version__ = "0.1.0"
