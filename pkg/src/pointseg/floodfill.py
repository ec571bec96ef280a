"""Seed-rooted geodesic transform over (map value, depth) pairs.

Replaces the upsampled iteration map with shortest-path costs from the seed,
where each step pays the Euclidean norm of (delta map value, weighted delta
depth). Regions that look close in map value but sit across a depth edge or
behind a ridge get lifted, which is what suppresses disconnected minima of
semantically similar instances.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _backend
from .errors import DimMismatch


@dataclass
class FillParams:
    depth_weight: Optional[float] = None  # None = auto: max(M) - min(M)
    connectivity: int = 4

    def __post_init__(self):
        if self.depth_weight is not None and self.depth_weight < 0:
            raise ValueError("depth_weight must be nonnegative")
        if self.connectivity not in (4, 8):
            raise ValueError("connectivity must be 4 or 8")


def resolve_depth_weight(m_up: np.ndarray, params: FillParams) -> float:
    """Depth rescaled to the map's value range so neither channel dominates."""
    if params.depth_weight is not None:
        return float(params.depth_weight)
    return float(m_up.max() - m_up.min())


def geodesic_fill(m_up: np.ndarray, depth: np.ndarray, seed,
                  params: FillParams = FillParams()) -> np.ndarray:
    """seed is (row, col) at full resolution; returns the cost field."""
    if m_up.shape != depth.shape:
        raise DimMismatch(f"map {m_up.shape} vs depth {depth.shape}")
    r, c = int(seed[0]), int(seed[1])
    H, W = m_up.shape
    if not (0 <= r < H and 0 <= c < W):
        raise DimMismatch(f"seed {seed} outside {m_up.shape}")
    w_d = resolve_depth_weight(m_up, params)
    return _backend.geodesic_fill(
        np.ascontiguousarray(m_up, dtype=np.float64),
        np.ascontiguousarray(depth, dtype=np.float64),
        r, c, w_d, params.connectivity)
