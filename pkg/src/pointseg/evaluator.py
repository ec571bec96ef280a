"""Simulated-user benchmark harness.

Clicks are placed against the error between prediction and ground truth,
either at the center of the largest error component or uniformly at random
over the whole error set. IoU is computed at ground-truth resolution with
the prediction re-projected by nearest neighbor when resolutions differ.
"""

import csv
import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import ndimage

from .errors import DimMismatch, NoError
from .segmenter import PipelineConfig, PromptPoint, Segmentation, Session, coordinate_map
from .tensor_io import load_bundle

MAX_CLICKS_DEFAULT = 20
NOC_THRESHOLDS = (0.90, 0.95)

_EIGHT = np.ones((3, 3), dtype=int)


@dataclass
class Trajectory:
    ious: list
    clicks: list
    instance_id: str


@dataclass
class BenchReport:
    noc90: float
    noc95: float
    miou_at: dict           # N -> mean IoU
    trajectories: list
    fingerprint: str
    config: dict
    failures: list = field(default_factory=list)

    def to_dict(self):
        return {
            "noc90": self.noc90,
            "noc95": self.noc95,
            "miou_at": {str(k): v for k, v in self.miou_at.items()},
            "instances": [
                {"instance_id": t.instance_id,
                 "ious": t.ious,
                 "clicks": [[p.x, p.y, p.label] for p in t.clicks]}
                for t in self.trajectories
            ],
            "failures": self.failures,
            "fingerprint": self.fingerprint,
            "config": self.config,
            "notes": "one session per ground-truth mask; IoU at ground-truth resolution",
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def write_csv(self, path):
        with open(path, "w", newline="") as f:
            wr = csv.writer(f)
            wr.writerow(["instance_id", "click", "iou"])
            for t in self.trajectories:
                for k, v in enumerate(t.ious, start=1):
                    wr.writerow([t.instance_id, k, f"{v:.6f}"])


def iou(pred, gt) -> float:
    pm = pred.mask if isinstance(pred, Segmentation) else np.asarray(pred, bool)
    gm = gt.mask if isinstance(gt, Segmentation) else np.asarray(gt, bool)
    if pm.shape != gm.shape:
        raise DimMismatch(f"{pm.shape} vs {gm.shape}")
    union = int((pm | gm).sum())
    if union == 0:
        return 1.0
    return int((pm & gm).sum()) / union


def next_click_center(pred, gt) -> PromptPoint:
    """Center of the largest 8-connected error component.

    Center = pixel maximizing the distance to the component's complement;
    all ties resolve to the row-major first option.
    """
    pm = pred.mask if isinstance(pred, Segmentation) else np.asarray(pred, bool)
    gm = gt.mask if isinstance(gt, Segmentation) else np.asarray(gt, bool)
    error = pm ^ gm
    if not error.any():
        raise NoError("prediction equals ground truth")
    labels, n = ndimage.label(error, structure=_EIGHT)
    sizes = np.bincount(labels.ravel())
    sizes[0] = 0
    best_size = sizes.max()
    tied = np.flatnonzero(sizes == best_size)
    if tied.size == 1:
        lab = int(tied[0])
    else:
        flat = labels.ravel()
        lab = int(min(tied, key=lambda t: np.flatnonzero(flat == t)[0]))
    comp = labels == lab
    dt = ndimage.distance_transform_edt(comp)
    idx = int(np.argmax(dt))  # row-major first on ties
    y, x = divmod(idx, error.shape[1])
    return PromptPoint(x=x, y=y, label=int(gm[y, x]))


def next_click_random(pred, gt, rng_seed) -> PromptPoint:
    """Uniform draw over the whole error set (not per component)."""
    pm = pred.mask if isinstance(pred, Segmentation) else np.asarray(pred, bool)
    gm = gt.mask if isinstance(gt, Segmentation) else np.asarray(gt, bool)
    error = pm ^ gm
    if not error.any():
        raise NoError("prediction equals ground truth")
    pixels = np.flatnonzero(error.ravel())
    rng = np.random.default_rng(rng_seed)
    idx = int(pixels[rng.integers(0, pixels.size)])
    y, x = divmod(idx, error.shape[1])
    return PromptPoint(x=x, y=y, label=int(gm[y, x]))


def reproject_mask(mask, to_dims) -> np.ndarray:
    """Nearest-neighbor reprojection of a bool mask to the target dims."""
    H, W = mask.shape
    th, tw = to_dims
    if (H, W) == (th, tw):
        return mask
    rows = np.clip(np.floor((np.arange(th) + 0.5) * H / th).astype(int), 0, H - 1)
    cols = np.clip(np.floor((np.arange(tw) + 0.5) * W / tw).astype(int), 0, W - 1)
    return mask[np.ix_(rows, cols)]


def simulate(bundle, gt_mask, strategy="center", max_clicks=MAX_CLICKS_DEFAULT,
             config=None, instance_id="instance", rng_seed=0) -> Trajectory:
    """Run one simulated session against a single ground-truth mask."""
    gt = np.asarray(gt_mask, dtype=bool)
    if not gt.any():
        raise NoError("empty ground truth mask")
    session = Session(bundle, config)
    eng_dims = session.dims
    gt_dims = gt.shape
    ious, clicks = [], []
    pred_gt_res = np.zeros(gt_dims, dtype=bool)
    for k in range(max_clicks):
        if strategy == "center":
            click = next_click_center(pred_gt_res, gt)
        elif strategy == "random":
            entropy = hashlib.sha256(f"{rng_seed}|{instance_id}|{k}".encode()).digest()
            click = next_click_random(pred_gt_res, gt,
                                      int.from_bytes(entropy[:8], "little"))
        else:
            raise ValueError(f"unknown strategy {strategy!r}")
        eng_click = coordinate_map(click, gt_dims, eng_dims)
        result = session.add_prompt(eng_click)
        pred_gt_res = reproject_mask(result.segmentation.mask, gt_dims)
        ious.append(iou(pred_gt_res, gt))
        clicks.append(click)
        if ious[-1] >= 1.0:
            break
    return Trajectory(ious=ious, clicks=clicks, instance_id=instance_id)


def noc(traj: Trajectory, threshold: float, max_clicks=MAX_CLICKS_DEFAULT) -> int:
    if not (0 < threshold <= 1):
        raise ValueError("threshold must be in (0, 1]")
    for k, v in enumerate(traj.ious, start=1):
        if v >= threshold:
            return k
    return max_clicks


def miou_at(trajs, n) -> float:
    """Mean IoU after n clicks; early-terminated runs hold their final IoU."""
    if n < 1:
        raise ValueError("n must be >= 1")
    vals = [t.ious[min(n, len(t.ious)) - 1] for t in trajs]
    return float(np.mean(vals)) if vals else 0.0


def config_fingerprint(config: PipelineConfig, extra=None) -> str:
    payload = config.fingerprint_dict()
    if extra:
        payload.update(extra)
    blob = json.dumps(payload, sort_keys=True)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def run_benchmark(dataset_dir, strategy="center", config=None,
                  max_clicks=MAX_CLICKS_DEFAULT, rng_seed=0) -> BenchReport:
    """Per-mask simulation over a directory of bundle directories."""
    config = config or PipelineConfig()
    dataset_dir = Path(dataset_dir)
    bundle_dirs = sorted(d for d in dataset_dir.iterdir()
                         if d.is_dir() and (d / "meta.json").exists())
    trajectories, failures = [], []
    for bdir in bundle_dirs:
        try:
            bundle = load_bundle(bdir)
        except Exception as e:  # noqa: BLE001 - per-instance failures recorded
            failures.append({"instance_id": bdir.name, "error": str(e)})
            continue
        for mask_id in sorted(bundle.gt_masks):
            inst = f"{bdir.name}/{mask_id}"
            try:
                trajectories.append(simulate(
                    bundle, bundle.gt_masks[mask_id], strategy=strategy,
                    max_clicks=max_clicks, config=config,
                    instance_id=inst, rng_seed=rng_seed))
            except Exception as e:  # noqa: BLE001
                failures.append({"instance_id": inst, "error": str(e)})
    extra = {"strategy": strategy, "max_clicks": max_clicks, "rng_seed": rng_seed}
    nocs90 = [noc(t, 0.90, max_clicks) for t in trajectories]
    nocs95 = [noc(t, 0.95, max_clicks) for t in trajectories]
    return BenchReport(
        noc90=float(np.mean(nocs90)) if nocs90 else math.nan,
        noc95=float(np.mean(nocs95)) if nocs95 else math.nan,
        miou_at={n: miou_at(trajectories, n) for n in range(1, max_clicks + 1)},
        trajectories=trajectories,
        fingerprint=config_fingerprint(config, extra),
        config={**config.fingerprint_dict(), **extra},
        failures=failures,
    )
