"""Interactive session engine.

Owns the prompt history, the per-point map cache, and the per-click pipeline:
coarse Markov map -> depth-guided JBU -> geodesic fill, then scale selection
for every point and truncated nearest-neighbor fusion. Implements the
newest-point discard rule: if the fused area change exceeds the new click's
limit, earlier points are rescored with the new point removed from their
score evaluations (the new point keeps its own scale and stays in fusion).
"""

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .attention import AttentionTensor, apply_temperature, ipf_normalize
from .errors import EmptyHistory, EmptyPromptSet, OutOfBounds
from .floodfill import FillParams, geodesic_fill
from .jbu import JbuParams, jbu_upsample, make_guide
from .markov import markov_map
from .scoring import AdaptiveConfig, boundary_distance, select_scale, size_limit
from .tensor_io import ImageBundle

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class PromptPoint:
    x: int  # column
    y: int  # row
    label: int  # 0 background, 1 foreground


@dataclass
class Segmentation:
    mask: np.ndarray  # H x W bool

    def __post_init__(self):
        self.mask = np.asarray(self.mask, dtype=bool)
        self.area = int(self.mask.sum())

    @classmethod
    def empty(cls, shape):
        return cls(np.zeros(shape, dtype=bool))


@dataclass
class PipelineConfig:
    tau: float = 0.4
    t_max: int = 64
    beta: float = 1.0
    ipf_tol: float = 1e-4
    ipf_max_iter: int = 50
    jbu: JbuParams = field(default_factory=JbuParams)
    fill: FillParams = field(default_factory=FillParams)
    adaptive: AdaptiveConfig = field(default_factory=AdaptiveConfig)

    def fingerprint_dict(self):
        return {
            "tau": self.tau, "t_max": self.t_max, "beta": self.beta,
            "ipf_tol": self.ipf_tol, "ipf_max_iter": self.ipf_max_iter,
            "jbu_sigma_spatial": self.jbu.sigma_spatial,
            "jbu_sigma_range": self.jbu.sigma_range,
            "jbu_radius": self.jbu.radius,
            "jbu_progressive": self.jbu.progressive,
            "fill_depth_weight": self.fill.depth_weight,
            "fill_connectivity": self.fill.connectivity,
            "sigma_adaptive": self.adaptive.sigma_adaptive,
            "sigma_prior": self.adaptive.sigma_prior,
            "r_min": self.adaptive.r_min,
            "use_adaptive": self.adaptive.use_adaptive,
        }


@dataclass
class AddResult:
    segmentation: Segmentation
    fallback_used: bool
    pass2_triggered: bool
    constraint_residual: bool
    debug: dict = field(default_factory=dict)


def fuse(scaled_maps) -> Segmentation:
    """Truncated nearest neighbor over (scaled map, label) pairs.

    Per pixel the prompt with the smallest scaled value wins (ties go to the
    lowest index); its label is assigned only if that value is <= 1,
    otherwise the pixel is background.
    """
    if not scaled_maps:
        raise EmptyPromptSet("fusion needs at least one scaled map")
    stack = np.stack([s for s, _ in scaled_maps])
    labels = np.array([lab for _, lab in scaled_maps])
    imin = np.argmin(stack, axis=0)  # first occurrence = lowest prompt index
    grid = np.indices(imin.shape)
    vmin = stack[imin, grid[0], grid[1]]
    mask = (vmin <= 1.0) & (labels[imin] == 1)
    return Segmentation(mask)


def coordinate_map(p: PromptPoint, from_dims, to_dims) -> PromptPoint:
    """Proportional rescaling of a click with pixel-center rounding."""
    fh, fw = from_dims
    th, tw = to_dims
    x = int(math.floor((p.x + 0.5) * tw / fw - 0.5 + 0.5))
    y = int(math.floor((p.y + 0.5) * th / fh - 0.5 + 0.5))
    return PromptPoint(x=min(max(x, 0), tw - 1), y=min(max(y, 0), th - 1),
                       label=p.label)


class Session:
    """Single-image interactive state. One writer at a time."""

    def __init__(self, bundle: ImageBundle, config: Optional[PipelineConfig] = None):
        self.bundle = bundle
        self.config = config or PipelineConfig()
        h, w = bundle.coarse_dims
        op = AttentionTensor(mat=np.array(bundle.attention, dtype=np.float64),
                             coarse_dims=(h, w), stochasticity="row")
        if self.config.beta != 1.0:
            op = apply_temperature(op, self.config.beta)
        self.operator = ipf_normalize(op, self.config.ipf_tol,
                                      self.config.ipf_max_iter)
        self.guide = make_guide(bundle.image, bundle.depth)
        self.points: list = []
        self.scales: dict = {}       # PromptPoint -> lambda
        self.maps: dict = {}         # (x, y) -> filled full-res map
        self.prev_seg = Segmentation.empty(bundle.dims)
        self.history: list = []      # snapshots of (points, scales, prev_seg)

    @property
    def dims(self):
        return self.bundle.dims

    def _check_bounds(self, p: PromptPoint):
        H, W = self.dims
        if not (0 <= p.x < W and 0 <= p.y < H):
            raise OutOfBounds(f"point ({p.x},{p.y}) outside {W}x{H}")

    def _coarse_seed(self, p: PromptPoint) -> int:
        H, W = self.dims
        h, w = self.bundle.coarse_dims
        row = min(h - 1, int((p.y + 0.5) * h / H))
        col = min(w - 1, int((p.x + 0.5) * w / W))
        return row * w + col

    def compute_map(self, p: PromptPoint) -> np.ndarray:
        """Full pipeline for one point: markov -> JBU -> geodesic fill."""
        coarse = markov_map(self.operator, self._coarse_seed(p),
                            self.config.tau, self.config.t_max)
        m_up = jbu_upsample(coarse, self.guide, self.config.jbu)
        return geodesic_fill(m_up, self.bundle.depth, (p.y, p.x),
                             self.config.fill)

    def _map_for(self, p: PromptPoint) -> np.ndarray:
        key = (p.x, p.y)
        if key not in self.maps:
            self.maps[key] = self.compute_map(p)
        return self.maps[key]

    def _scaled(self, p: PromptPoint, scales) -> np.ndarray:
        return self._map_for(p) / scales[p]

    def _select_for(self, i, points_all, score_points, scales):
        """Rescore point i against the other points' current scaled maps."""
        pi = points_all[i]
        others = [(j, self._scaled(pj, scales), pj.label)
                  for j, pj in enumerate(points_all)
                  if j != i and pj in scales]
        return select_scale(self._map_for(pi), pi, score_points,
                            self.prev_seg.mask, others,
                            self.config.adaptive, point_index=i)

    def add_prompt(self, p: PromptPoint) -> AddResult:
        self._check_bounds(p)
        cfg = self.config.adaptive
        self._map_for(p)  # compute or fetch cached
        points = self.points + [p]
        n = len(points)
        new_i = n - 1
        snapshot = (list(self.points), dict(self.scales),
                    Segmentation(self.prev_seg.mask.copy()))

        fallback = False
        # pass 1: full point set in every score evaluation. The new point is
        # scaled first (against the committed scales), then earlier points
        # are rescored in order, each seeing the freshest scales.
        scales = dict(self.scales)
        res = self._select_for(new_i, points, points, scales)
        scales[p] = res.lambda_star
        fallback |= res.fallback_used
        for i in range(n - 1):
            res_i = self._select_for(i, points, points, scales)
            scales[points[i]] = res_i.lambda_star
            fallback |= res_i.fallback_used
        fused = fuse([(self._scaled(q, scales), q.label) for q in points])

        delta = abs(fused.area - self.prev_seg.area)
        limit = size_limit(boundary_distance(p, self.prev_seg.mask), cfg) \
            if cfg.use_adaptive else math.inf
        pass1_delta = delta
        pass2 = False
        score_sets = {i: tuple(points) for i in range(n)}

        if cfg.use_adaptive and not (delta < limit) and n > 1:
            # discard rule: earlier points are rescored with the new point
            # removed from their score evaluations; it keeps its own scale
            # and stays in fusion.
            pass2 = True
            reduced = points[:-1]
            for i in range(n - 1):
                res_i = self._select_for(i, points, reduced, scales)
                scales[points[i]] = res_i.lambda_star
                fallback |= res_i.fallback_used
                score_sets[i] = tuple(reduced)
            fused = fuse([(self._scaled(q, scales), q.label) for q in points])
            delta = abs(fused.area - self.prev_seg.area)

        residual = cfg.use_adaptive and not (delta < limit) and not fallback
        if residual:
            log.warning("ConstraintResidual: delta %.1f >= limit %.1f after pass 2",
                        delta, limit)

        self.history.append(snapshot)
        self.points = points
        self.scales = scales
        self.prev_seg = fused
        return AddResult(segmentation=fused, fallback_used=fallback,
                         pass2_triggered=pass2, constraint_residual=residual,
                         debug={"delta": delta, "pass1_delta": pass1_delta,
                                "limit": limit, "score_sets": score_sets,
                                "scales": dict(scales)})

    def undo(self) -> Segmentation:
        if not self.history:
            raise EmptyHistory("no committed clicks")
        points, scales, seg = self.history.pop()
        self.points = points
        self.scales = scales
        self.prev_seg = seg
        return seg
