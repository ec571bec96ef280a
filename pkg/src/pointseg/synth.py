"""Deterministic synthetic scenes: image, inverse depth, attention, gt masks.

Objects are rendered back to front on a layered canvas. Depth is the
normalized inverse of each layer's distance with a mild within-object
gradient. The coarse attention row for cell r is a softmax over negative
squared distances between per-cell features, where a cell's feature is its
dominant object's semantic-group embedding plus noise. Same-group objects at
different depths produce the overlapping-instance scenario that depth
guidance is supposed to solve.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .errors import SpecInvalid
from .tensor_io import ImageBundle, save_bundle

SOFTMAX_T = 0.5  # keeps within-group affinity >= 10x cross-group
FEATURE_DIM = 8


@dataclass
class SceneObject:
    shape: str          # disk | rectangle | blob
    layer: float        # distance from camera; smaller = closer
    color: tuple        # RGB in [0,1]
    group: int          # semantic group id (>= 1; 0 is background)
    params: dict = field(default_factory=dict)  # shape geometry


@dataclass
class SceneSpec:
    dims: tuple                 # (H, W)
    coarse_dims: tuple          # (h, w)
    objects: list               # list of SceneObject
    noise: float = 0.05
    seed: int = 0
    bg_layer: float = None      # None = twice the farthest object
    bg_color: tuple = (0.35, 0.4, 0.45)

    def validate(self):
        H, W = self.dims
        h, w = self.coarse_dims
        if not (1 <= len(self.objects) <= 8):
            raise SpecInvalid("need 1..8 objects")
        layers = [o.layer for o in self.objects]
        if len(set(layers)) != len(layers):
            raise SpecInvalid("layer depths must be distinct")
        if H % h or W % w:
            raise SpecInvalid("coarse dims must divide image dims")


def _draw_shape(obj: SceneObject, dims, rng):
    H, W = dims
    yy, xx = np.mgrid[0:H, 0:W]
    p = obj.params
    if obj.shape == "disk":
        cy, cx, r = p["cy"], p["cx"], p["r"]
        return (yy - cy) ** 2 + (xx - cx) ** 2 <= r * r
    if obj.shape == "rectangle":
        return ((p["y0"] <= yy) & (yy < p["y1"]) &
                (p["x0"] <= xx) & (xx < p["x1"]))
    if obj.shape == "blob":
        # thresholded smoothed noise around a center: non-convex boundaries
        field_ = rng.normal(size=dims)
        field_ = ndimage.gaussian_filter(field_, sigma=p.get("sigma", 4.0))
        cy, cx, r = p["cy"], p["cx"], p["r"]
        dist = np.sqrt((yy - cy) ** 2 + (xx - cx) ** 2)
        score = field_ - field_.mean() - (dist / r - 1.0) * field_.std() * 2.0
        mask = score > 0
        mask &= dist <= 1.8 * r
        if not mask.any():
            mask = dist <= r  # degenerate blob: fall back to the disk core
        return mask
    raise SpecInvalid(f"unknown shape {obj.shape!r}")


def generate_scene(spec: SceneSpec):
    """Render a spec into (ImageBundle, {mask_id: gt mask})."""
    spec.validate()
    rng = np.random.default_rng(spec.seed)
    H, W = spec.dims
    h, w = spec.coarse_dims

    bg_color = np.asarray(spec.bg_color, dtype=np.float64)
    image = np.tile(bg_color, (H, W, 1)).copy()
    far = spec.bg_layer if spec.bg_layer is not None \
        else max(o.layer for o in spec.objects) * 2.0
    depth_raw = np.full((H, W), 1.0 / far)
    owner = np.full((H, W), -1)   # object index per pixel (-1 = background)
    group_map = np.zeros((H, W), dtype=int)

    order = sorted(range(len(spec.objects)), key=lambda i: -spec.objects[i].layer)
    yy = np.arange(H)[:, None] / max(H - 1, 1)
    for i in order:
        obj = spec.objects[i]
        mask = _draw_shape(obj, spec.dims, rng)
        image[mask] = np.asarray(obj.color)
        # mild vertical gradient inside the object so depth is not flat
        depth_raw[mask] = 1.0 / obj.layer + 0.005 * np.broadcast_to(yy, (H, W))[mask]
        owner[mask] = i
        group_map[mask] = obj.group

    image += rng.normal(scale=spec.noise * 0.2, size=image.shape)
    image = np.clip(image, 0.0, 1.0)
    lo, hi = depth_raw.min(), depth_raw.max()
    depth = (depth_raw - lo) / (hi - lo) if hi > lo else np.zeros_like(depth_raw)

    # coarse features: dominant group per cell -> embedding + noise
    cell_h, cell_w = H // h, W // w
    cells = group_map.reshape(h, cell_h, w, cell_w).transpose(0, 2, 1, 3).reshape(h, w, -1)
    dominant = np.array([[np.bincount(cells[r, c]).argmax() for c in range(w)]
                         for r in range(h)])
    n_groups = int(group_map.max()) + 1
    emb = np.zeros((n_groups, FEATURE_DIM))
    for g in range(n_groups):
        emb[g, g % FEATURE_DIM] = 2.0
        emb[g, (g + 3) % FEATURE_DIM] = -2.0 if g % 2 else 1.0
    feats = emb[dominant.reshape(-1)] + rng.normal(scale=spec.noise,
                                                   size=(h * w, FEATURE_DIM))
    d2 = ((feats[:, None, :] - feats[None, :, :]) ** 2).sum(axis=2)
    logits = -d2 / SOFTMAX_T
    logits -= logits.max(axis=1, keepdims=True)
    attn = np.exp(logits)
    attn /= attn.sum(axis=1, keepdims=True)

    gt = {}
    for i, obj in enumerate(spec.objects):
        vis = owner == i
        gt[f"obj{i}"] = vis

    bundle = ImageBundle(image=image, depth=depth, attention=attn,
                         coarse_dims=(h, w), orig_dims=(H, W),
                         gt_masks=gt, meta={"h": h, "w": w, "synthetic": True})
    return bundle, gt


def overlap_same_class_spec(seed: int, dims=(48, 48), coarse_dims=(12, 12)) -> SceneSpec:
    """Two overlapping same-group disks at different depths.

    Unsolvable from one click without depth-guided fill (the semantic block
    covers both disks) but solvable with it. The disks share a color close
    to the background so the RGB guide cannot separate anything; only depth
    carries the instance boundary. The background depth sits between the
    two disks, keeping the inter-disk depth wall the tallest edge in the
    filled map.
    """
    rng = np.random.default_rng(seed)
    H, W = dims
    r = int(min(H, W) * (0.2 + 0.03 * rng.random()))
    cy = H // 2 + int(rng.integers(-2, 3))
    cx1 = W // 3 + int(rng.integers(-2, 3))
    cx2 = cx1 + int(r * 1.35)
    color = (0.42, 0.44, 0.47)
    objects = [
        SceneObject("disk", layer=2.0, color=color, group=1,
                    params={"cy": cy, "cx": cx1, "r": r}),
        SceneObject("disk", layer=20.0, color=color, group=1,
                    params={"cy": cy, "cx": cx2, "r": r}),
    ]
    return SceneSpec(dims=dims, coarse_dims=coarse_dims, objects=objects,
                     noise=0.03, seed=seed, bg_layer=2.4)


def mixed_scene_spec(seed: int, dims=(48, 48), coarse_dims=(12, 12)) -> SceneSpec:
    """1-3 distinct-group objects of varied shapes and depths."""
    rng = np.random.default_rng(seed)
    H, W = dims
    n = int(rng.integers(1, 4))
    shapes = ["disk", "rectangle", "blob"]
    palette = [(0.85, 0.3, 0.2), (0.2, 0.65, 0.3), (0.25, 0.35, 0.8)]
    objects = []
    layers = rng.permutation([2.0, 3.5, 5.0])[:n]
    for i in range(n):
        shape = shapes[int(rng.integers(0, len(shapes)))]
        r = int(min(H, W) * (0.15 + 0.08 * rng.random()))
        cy = int(rng.integers(r + 2, H - r - 2))
        cx = int(rng.integers(r + 2, W - r - 2))
        if shape == "rectangle":
            params = {"y0": cy - r, "y1": cy + r, "x0": cx - r, "x1": cx + r}
        else:
            params = {"cy": cy, "cx": cx, "r": r, "sigma": 3.0}
        objects.append(SceneObject(shape, layer=float(layers[i]),
                                   color=palette[i % 3], group=i + 1,
                                   params=params))
    return SceneSpec(dims=dims, coarse_dims=coarse_dims, objects=objects,
                     noise=0.04, seed=seed)


def make_suite(out_dir, n_scenes: int, kind: str = "mixed", seed: int = 0,
               dims=(48, 48), coarse_dims=(12, 12)):
    """Write a directory of bundle dirs consumable by the evaluator."""
    from pathlib import Path
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    makers = {"mixed": mixed_scene_spec, "overlap-same-class": overlap_same_class_spec}
    if kind not in makers:
        raise SpecInvalid(f"unknown suite kind {kind!r}")
    for i in range(n_scenes):
        spec = makers[kind](seed + i, dims=dims, coarse_dims=coarse_dims)
        bundle, gt = generate_scene(spec)
        gt = {k: v for k, v in gt.items() if v.any()}
        save_bundle(out_dir / f"scene_{i:03d}", bundle.image, bundle.depth,
                    bundle.attention, bundle.coarse_dims,
                    gt_masks=gt, extra_meta={"synthetic": True, "kind": kind})
    return out_dir
