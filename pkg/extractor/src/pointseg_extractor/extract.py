"""Image -> interchange bundle pipeline.

Resizes the working image to a bounded shortest side, runs the configured
backbones (depth gets a high-resolution render that is resampled back), does
horizontal-flip averaging for both modalities, and writes the bundle layout
that the engine's loader validates.
"""

from pathlib import Path

import numpy as np
from PIL import Image

from pointseg.attention import AttentionTensor, flip_average
from pointseg.tensor_io import normalize_depth, save_bundle

from .backbones import (BackboneConfig, load_attention_backbone,
                        load_depth_backbone)


def _resize(image: np.ndarray, shortest: int, enlarge=False) -> np.ndarray:
    H, W = image.shape[:2]
    short = min(H, W)
    if short == shortest or (short < shortest and not enlarge):
        return image
    scale = shortest / short
    nh, nw = max(1, round(H * scale)), max(1, round(W * scale))
    img8 = np.clip(np.round(image * 255.0), 0, 255).astype(np.uint8)
    out = Image.fromarray(img8, mode="RGB").resize((nw, nh), Image.BILINEAR)
    return np.asarray(out, dtype=np.float64) / 255.0


def _resize_depth(depth: np.ndarray, dims) -> np.ndarray:
    if depth.shape == tuple(dims):
        return depth
    out = Image.fromarray(depth.astype(np.float32), mode="F").resize(
        (dims[1], dims[0]), Image.BILINEAR)
    return np.asarray(out, dtype=np.float64)


def _run_depth(model, image, cfg: BackboneConfig):
    """High-res inference, resampled back to the working resolution."""
    H, W = image.shape[:2]
    hires = _resize(image, cfg.depth_side, enlarge=True)
    raw = _resize_depth(np.asarray(model(hires), dtype=np.float64), (H, W))
    if cfg.tta:
        flipped = _resize_depth(
            np.asarray(model(hires[:, ::-1]), dtype=np.float64), (H, W))
        raw = 0.5 * (raw + flipped[:, ::-1])
    if model.emits == "depth":
        raw = 1.0 / (raw + 0.25)
    return normalize_depth(raw)


def _run_attention(model, image, cfg: BackboneConfig):
    attn, coarse_dims = model(image)
    attn = np.asarray(attn, dtype=np.float64)
    attn /= attn.sum(axis=1, keepdims=True)
    if cfg.tta:
        attn_f, dims_f = model(image[:, ::-1])
        attn_f = np.asarray(attn_f, dtype=np.float64)
        attn_f /= attn_f.sum(axis=1, keepdims=True)
        merged = flip_average(AttentionTensor(attn, coarse_dims, "row"),
                              AttentionTensor(attn_f, dims_f, "row"))
        attn = merged.mat
    return attn, coarse_dims


def extract(image_path, cfg: BackboneConfig, out_dir,
            attention_model=None, depth_model=None) -> Path:
    """Emit one bundle directory; returns its path.

    attention_model / depth_model override the registry lookup so callers
    can inject fakes or pre-loaded models.
    """
    with Image.open(image_path) as im:
        image = np.asarray(im.convert("RGB"), dtype=np.float64) / 255.0
    orig_dims = image.shape[:2]
    image = _resize(image, cfg.max_side)

    if attention_model is None:
        attention_model = load_attention_backbone(cfg)
    if depth_model is None:
        depth_model = load_depth_backbone(cfg)
    if attention_model is None and depth_model is None:
        raise ValueError("select at least one backbone")

    H, W = image.shape[:2]
    if attention_model is not None:
        attn, coarse_dims = _run_attention(attention_model, image, cfg)
    else:
        # depth-only bundle still needs a (trivial) operator to stay loadable
        coarse_dims = (1, 1)
        attn = np.ones((1, 1))
    depth = _run_depth(depth_model, image, cfg) if depth_model is not None \
        else np.zeros((H, W))

    return save_bundle(
        Path(out_dir), image, depth, attn, coarse_dims, orig_dims=orig_dims,
        extra_meta={
            "attention_backbone": cfg.attention,
            "depth_backbone": cfg.depth,
            "layers": list(cfg.layers),
            "layer_weights": list(cfg.layer_weights),
            "tta": bool(cfg.tta),
            "sd_timestep": cfg.sd_timestep,
            "source_image": Path(image_path).name,
        })
