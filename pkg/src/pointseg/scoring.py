"""Per-point scale selection.

Each prompt's filled map M_i is divided by a scalar lambda before fusion;
pixels with M_i / lambda <= 1 are claimable by that prompt. The divisor is
chosen from the map's own level-set values by maximizing a product of four
scores: edge alignment, same-class coverage, opposite-class exclusion, and a
gate on the segment-area change (adaptive) or on absolute area (prior).
"""

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import ndimage

from . import _backend
from .errors import NoCandidates

CANDIDATE_EPS = 1e-6
CANDIDATE_CAP = 512


@dataclass
class AdaptiveConfig:
    sigma_adaptive: float = 6.0
    sigma_prior: float = 0.9
    r_min: float = 1.0
    use_adaptive: bool = True

    def __post_init__(self):
        if self.sigma_adaptive <= 0:
            raise ValueError("sigma_adaptive must be positive")
        if not (0 < self.sigma_prior <= 1):
            raise ValueError("sigma_prior must be in (0, 1]")
        if self.r_min < 1:
            raise ValueError("r_min must be >= 1")


@dataclass
class ScoreBreakdown:
    lam: float
    s_edge: float
    s_pos: float
    s_neg: float
    s_adaptive: float
    total: float
    area_delta: float = 0.0
    limit: float = math.inf


@dataclass
class SelectResult:
    lambda_star: float
    breakdowns: list
    fallback_used: bool
    best_index: int = 0


def boundary_distance(point, prev_mask: np.ndarray) -> float:
    """Euclidean distance from the click to the nearest same-class pixel.

    Infinite when the previous segmentation has no pixel of the click's
    class (e.g. a foreground click on the initial empty mask).
    """
    same = prev_mask.astype(bool) == bool(point.label)
    if not same.any():
        return math.inf
    # exact EDT: distance of every pixel to the nearest same-class pixel
    dt = ndimage.distance_transform_edt(~same)
    return float(dt[point.y, point.x])


def size_limit(r: float, cfg: AdaptiveConfig) -> float:
    """Area of a circle whose radius is the boundary distance, scaled."""
    if math.isinf(r):
        return math.inf
    return math.pi * (cfg.sigma_adaptive * max(r, cfg.r_min)) ** 2


def candidate_lambdas(m: np.ndarray, sigma_prior: float) -> np.ndarray:
    """Level-set divisor candidates for one map.

    Unique positive values, each nudged up by epsilon so the level set
    {M <= lambda} includes the value's plateau; truncated to candidates whose
    inclusion area stays under sigma_prior * H * W; capped at CANDIDATE_CAP
    by uniform subsampling.
    """
    flat = np.sort(m.ravel())
    vals = np.unique(flat)
    vals = vals[vals > 0]
    if vals.size == 0:
        raise NoCandidates("map has no positive values")
    cands = vals + CANDIDATE_EPS
    # area(M <= lambda) via one searchsorted against the sorted map
    areas = np.searchsorted(flat, cands, side="right")
    cap = sigma_prior * m.size
    cands = cands[areas < cap]
    if cands.size == 0:
        raise NoCandidates("every level set exceeds the size prior")
    if cands.size > CANDIDATE_CAP:
        idx = np.unique(np.linspace(0, cands.size - 1, CANDIDATE_CAP).astype(int))
        cands = cands[idx]
    return cands


def _edge_band_scores(m, lambdas):
    """Mean gradient magnitude over each candidate's contour band.

    Band half-width is half the gap to the adjacent candidate values, so
    quantized maps never produce empty bands.
    """
    gy, gx = np.gradient(m)
    grad = np.hypot(gy, gx)
    lambdas = np.asarray(lambdas, dtype=np.float64)
    nl = len(lambdas)
    if nl > 1:
        gaps = np.diff(lambdas)
        delta = 0.5 * np.minimum(np.concatenate(([np.inf], gaps)),
                                 np.concatenate((gaps, [np.inf])))
    else:
        delta = np.array([max(lambdas[0] * 0.5, CANDIDATE_EPS)])
    delta = np.maximum(delta, 2 * CANDIDATE_EPS)
    # band means via one sort: count and sum of grad over (lam-d, lam+d]
    order = np.argsort(m, axis=None, kind="stable")
    mv = m.ravel()[order]
    sums = np.concatenate(([0.0], np.cumsum(grad.ravel()[order])))
    lo = np.searchsorted(mv, lambdas - delta, side="right")
    hi = np.searchsorted(mv, lambdas + delta, side="right")
    counts = hi - lo
    raw = np.zeros(nl)
    nz = counts > 0
    raw[nz] = (sums[hi[nz]] - sums[lo[nz]]) / counts[nz]
    top = raw.max()
    if top <= 0:
        return np.ones(len(lambdas))
    return np.clip(raw / top, 0.0, 1.0)


def _other_map_context(other_maps, point_index, shape):
    """Collapse the fixed scaled maps of the other prompts.

    Returns (b, tie_win, f_other): per pixel the minimal other value, whether
    this point wins an exact tie (lower prompt index), and whether the pixel
    is foreground when an other map wins.
    """
    n = shape[0] * shape[1]
    if not other_maps:
        b = np.full(n, np.inf)
        tie_win = np.ones(n, dtype=np.uint8)
        f_other = np.zeros(n, dtype=np.uint8)
        return b, tie_win, f_other
    ordered = sorted(other_maps, key=lambda t: t[0])
    stack = np.stack([s.ravel() for _, s, _ in ordered])
    labels = np.array([lab for _, _, lab in ordered])
    indices = np.array([j for j, _, _ in ordered])
    kmin = np.argmin(stack, axis=0)  # first occurrence = lowest index
    b = stack[kmin, np.arange(n)]
    jmin = indices[kmin]
    tie_win = (point_index < jmin).astype(np.uint8)
    f_other = ((b <= 1.0) & (labels[kmin] == 1)).astype(np.uint8)
    return np.ascontiguousarray(b), tie_win, f_other


def score_all(lambdas, m_i, point_i, points, prev_mask, other_maps, cfg,
              point_index=0) -> list:
    """ScoreBreakdown for every candidate divisor.

    other_maps: list of (prompt_index, scaled map S_j, label) with their
    divisors already fixed; only this point's map varies with lambda.
    """
    lambdas = np.asarray(lambdas, dtype=np.float64)
    H, W = m_i.shape
    s_edge = _edge_band_scores(m_i, lambdas)

    same_vals = np.array([m_i[p.y, p.x] for p in points if p.label == point_i.label])
    opp_vals = np.array([m_i[p.y, p.x] for p in points if p.label != point_i.label])
    n_same = same_vals.size

    a = np.ascontiguousarray(m_i.ravel(), dtype=np.float64)
    b, tie_win, f_other = _other_map_context(other_maps, point_index, m_i.shape)
    areas = _backend.fused_area_scan(a, b, tie_win, f_other,
                                     int(point_i.label), lambdas)
    prev_area = int(prev_mask.sum())

    if cfg.use_adaptive:
        limit = size_limit(boundary_distance(point_i, prev_mask), cfg)
    else:
        limit = math.inf
        sorted_m = np.sort(a)

    out = []
    for k, lam in enumerate(lambdas):
        s_neg = 0.0 if (opp_vals.size and (opp_vals <= lam).any()) else 1.0
        covered = int((same_vals <= lam).sum()) if n_same else 0
        s_pos = (1 + covered) / (1 + n_same)
        delta = float(abs(int(areas[k]) - prev_area))
        if cfg.use_adaptive:
            s_adapt = 1.0 if delta < limit else 0.0
        else:
            incl = int(np.searchsorted(sorted_m, lam, side="right"))
            s_adapt = 1.0 if incl < cfg.sigma_prior * H * W else 0.0
        total = s_edge[k] * s_pos * s_neg * s_adapt
        out.append(ScoreBreakdown(lam=float(lam), s_edge=float(s_edge[k]),
                                  s_pos=float(s_pos), s_neg=float(s_neg),
                                  s_adaptive=float(s_adapt), total=float(total),
                                  area_delta=delta, limit=limit))
    return out


def score(lam, m_i, point_i, points, prev_mask, other_maps, cfg,
          point_index=0) -> ScoreBreakdown:
    """Single-candidate view of score_all (edge score normalizes to itself)."""
    return score_all([lam], m_i, point_i, points, prev_mask, other_maps, cfg,
                     point_index)[0]


def select_scale(m_i, point_i, points, prev_mask, other_maps, cfg,
                 point_index=0) -> SelectResult:
    """Pick the divisor maximizing the composed score.

    Ties break toward the smallest lambda. If every candidate scores zero,
    retry with the area gate relaxed (s_adaptive forced to 1) and flag it.
    """
    lambdas = candidate_lambdas(m_i, cfg.sigma_prior)
    breakdowns = score_all(lambdas, m_i, point_i, points, prev_mask,
                           other_maps, cfg, point_index)
    totals = np.array([bd.total for bd in breakdowns])
    fallback = False
    if totals.max() <= 0:
        totals = np.array([bd.s_edge * bd.s_pos * bd.s_neg for bd in breakdowns])
        fallback = True
    best = int(np.argmax(totals))  # argmax takes the first = smallest lambda
    return SelectResult(lambda_star=float(lambdas[best]), breakdowns=breakdowns,
                        fallback_used=fallback, best_index=best)
