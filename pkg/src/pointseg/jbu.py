"""Depth-guided joint bilateral upsampling of coarse iteration maps.

The guide is the full-resolution RGBD image, all four channels in [0, 1] so
neither modality dominates the range term. Optionally progressive: repeated
2x stages, each guided by a box-downsampled guide, then one final resample.
"""

from dataclasses import dataclass

import numpy as np

from . import _backend
from .errors import DimMismatch
from .markov import CoarseMarkovMap


@dataclass
class JbuParams:
    sigma_spatial: float = 1.0
    sigma_range: float = 0.1
    radius: int = 2
    progressive: bool = True

    def __post_init__(self):
        if self.sigma_spatial <= 0 or self.sigma_range <= 0:
            raise ValueError("sigmas must be positive")
        if self.radius < 1:
            raise ValueError("radius must be >= 1")


def make_guide(image: np.ndarray, depth: np.ndarray) -> np.ndarray:
    """Stack RGB and depth into the H x W x 4 guide."""
    if image.shape[:2] != depth.shape:
        raise DimMismatch(f"image {image.shape[:2]} vs depth {depth.shape}")
    return np.ascontiguousarray(np.dstack([image, depth]))


def _resample_guide(guide, new_h, new_w):
    """Area-average the guide down to an intermediate resolution."""
    H, W = guide.shape[0], guide.shape[1]
    ys = np.minimum((np.arange(new_h) * H) // new_h, H - 1)
    xs = np.minimum((np.arange(new_w) * W) // new_w, W - 1)
    return np.ascontiguousarray(guide[np.ix_(ys, xs)])


def jbu_upsample(src: CoarseMarkovMap, guide: np.ndarray, params: JbuParams,
                 return_flags: bool = False):
    """Upsample src.values to the guide's resolution."""
    cur = np.ascontiguousarray(src.values, dtype=np.float64)
    H, W = guide.shape[0], guide.shape[1]
    if guide.ndim != 3 or guide.shape[2] != 4:
        raise DimMismatch("guide must be H x W x 4")
    if H < cur.shape[0] or W < cur.shape[1]:
        raise DimMismatch("guide smaller than source")
    flags = None
    if params.progressive:
        while cur.shape[0] * 2 < H or cur.shape[1] * 2 < W:
            nh = min(cur.shape[0] * 2, H)
            nw = min(cur.shape[1] * 2, W)
            g = _resample_guide(guide, nh, nw)
            cur, _ = _backend.jbu_filter(cur, g, params.sigma_spatial,
                                         params.sigma_range, params.radius)
            cur = np.ascontiguousarray(cur)
    out, flags = _backend.jbu_filter(cur, np.ascontiguousarray(guide, dtype=np.float64),
                                     params.sigma_spatial, params.sigma_range,
                                     params.radius)
    if return_flags:
        return out, flags.astype(bool)
    return out
