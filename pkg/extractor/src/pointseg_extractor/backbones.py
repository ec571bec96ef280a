"""Backbone registry with lazy model imports.

Real backbones pull torch/transformers only when actually requested, so the
package imports cleanly on machines without GPU stacks. Every backbone is a
plain callable, which also makes them trivially fake-able in tests.
"""

from dataclasses import dataclass, field

import numpy as np

ATTENTION_BACKBONES = ("sd1", "sd2", "vit-b", "stub", "none")
DEPTH_BACKBONES = ("da2", "marigold", "stub", "none")

# SD attention capture needs a denoising timestep; the upstream recipe does
# not pin one, so it is a documented flag. t=50 of 1000 keeps the image
# mostly intact while the attention maps are already semantic.
SD_TIMESTEP_DEFAULT = 50


class ModelLoadError(RuntimeError):
    pass


@dataclass
class BackboneConfig:
    attention: str = "stub"
    depth: str = "stub"
    layers: tuple = (8, 9)          # self-attention layers to aggregate
    layer_weights: tuple = (0.5, 0.5)
    tta: bool = True
    max_side: int = 1024            # shortest-side cap for the working image
    depth_side: int = 2024          # shortest side fed to the depth model
    sd_timestep: int = SD_TIMESTEP_DEFAULT

    def __post_init__(self):
        if self.attention not in ATTENTION_BACKBONES:
            raise ValueError(f"unknown attention backbone {self.attention!r}")
        if self.depth not in DEPTH_BACKBONES:
            raise ValueError(f"unknown depth backbone {self.depth!r}")
        if self.attention == "none" and self.depth == "none":
            raise ValueError("select at least one backbone")
        if len(self.layers) != len(self.layer_weights):
            raise ValueError("layers and layer_weights must pair up")


class AttentionBackbone:
    """Callable: float RGB image (H,W,3) -> (attention (hw,hw), (h,w)).

    Rows of the returned matrix must sum to 1 within 1e-3; IPF projection to
    doubly stochastic happens engine-side.
    """

    def __call__(self, image: np.ndarray):
        raise NotImplementedError


class DepthBackbone:
    """Callable: float RGB image (H,W,3) -> raw depth (H,W).

    `emits` declares the convention: "inverse" passes through, "depth" gets
    the 1/(z+0.25) transform before normalization.
    """

    emits = "inverse"

    def __call__(self, image: np.ndarray):
        raise NotImplementedError


class StubAttention(AttentionBackbone):
    """Deterministic color-affinity attention for smoke tests and demos."""

    patch = 16

    def __call__(self, image):
        H, W = image.shape[:2]
        h = max(1, H // self.patch)
        w = max(1, W // self.patch)
        feats = np.empty((h * w, 3))
        for r in range(h):
            for c in range(w):
                block = image[r * self.patch:min((r + 1) * self.patch, H),
                              c * self.patch:min((c + 1) * self.patch, W)]
                feats[r * w + c] = block.reshape(-1, 3).mean(axis=0)
        d2 = ((feats[:, None, :] - feats[None, :, :]) ** 2).sum(axis=2)
        logits = -d2 / 0.05
        logits -= logits.max(axis=1, keepdims=True)
        attn = np.exp(logits)
        attn /= attn.sum(axis=1, keepdims=True)
        return attn, (h, w)


class StubDepth(DepthBackbone):
    """Luminance-as-depth placeholder; constant scenes give constant depth."""

    emits = "inverse"

    def __call__(self, image):
        return image @ np.array([0.299, 0.587, 0.114])


def _torch_import(name):
    try:
        import torch  # noqa: F401
        import transformers  # noqa: F401
    except ImportError as e:
        raise ModelLoadError(
            f"backbone {name!r} needs the [models] extra (torch, transformers): {e}"
        ) from e


def _oom_hint(e, max_side):
    return ModelLoadError(
        f"backbone ran out of memory ({e}); retry with --max-side "
        f"{max(max_side // 2, 256)} or smaller"
    )


class _SdAttention(AttentionBackbone):
    def __init__(self, variant, cfg: BackboneConfig):
        _torch_import(variant)
        self.variant = variant
        self.cfg = cfg
        raise ModelLoadError(
            f"{variant} attention capture requires local diffusion weights; "
            "none found. Point HF_HOME at a cache containing them."
        )


class _VitAttention(AttentionBackbone):
    def __init__(self, cfg: BackboneConfig):
        _torch_import("vit-b")
        import transformers
        self.cfg = cfg
        try:
            self.model = transformers.ViTModel.from_pretrained(
                "google/vit-base-patch16-224", attn_implementation="eager",
                local_files_only=True)
        except Exception as e:  # noqa: BLE001 - anything here means "no weights"
            raise ModelLoadError(f"could not load ViT-B weights: {e}") from e

    def __call__(self, image):
        import torch
        H, W = image.shape[:2]
        x = torch.from_numpy(image.transpose(2, 0, 1)[None]).float()
        try:
            with torch.no_grad():
                out = self.model(pixel_values=x, output_attentions=True,
                                 interpolate_pos_encoding=True)
        except torch.cuda.OutOfMemoryError as e:
            raise _oom_hint(e, self.cfg.max_side) from e
        layers = [out.attentions[i][0].mean(dim=0) for i in self.cfg.layers]
        attn = sum(wt * l for wt, l in zip(self.cfg.layer_weights, layers))
        attn = attn[1:, 1:]  # drop the CLS token row/column
        attn = (attn / attn.sum(dim=1, keepdim=True)).numpy().astype(np.float64)
        h = max(1, round(H / 16))
        w = attn.shape[0] // h
        return attn, (h, w)


class _Da2Depth(DepthBackbone):
    emits = "inverse"  # relative inverse depth straight from the model

    def __init__(self, cfg: BackboneConfig):
        _torch_import("da2")
        import transformers
        self.cfg = cfg
        try:
            self.pipe = transformers.pipeline(
                "depth-estimation", model="depth-anything/Depth-Anything-V2-Small-hf",
                local_files_only=True)
        except Exception as e:  # noqa: BLE001
            raise ModelLoadError(f"could not load DepthAnything weights: {e}") from e

    def __call__(self, image):
        from PIL import Image
        img8 = np.clip(np.round(image * 255.0), 0, 255).astype(np.uint8)
        try:
            out = self.pipe(Image.fromarray(img8))
        except RuntimeError as e:
            raise _oom_hint(e, self.cfg.max_side) from e
        return np.asarray(out["predicted_depth"], dtype=np.float64)


class _MarigoldDepth(DepthBackbone):
    emits = "depth"  # metric-style depth; inverted downstream as 1/(z+0.25)

    def __init__(self, cfg: BackboneConfig):
        _torch_import("marigold")
        raise ModelLoadError(
            "marigold requires the diffusers pipeline and local weights; "
            "none found in this environment."
        )


def load_attention_backbone(cfg: BackboneConfig):
    name = cfg.attention
    if name == "none":
        return None
    if name == "stub":
        return StubAttention()
    if name in ("sd1", "sd2"):
        return _SdAttention(name, cfg)
    return _VitAttention(cfg)


def load_depth_backbone(cfg: BackboneConfig):
    name = cfg.depth
    if name == "none":
        return None
    if name == "stub":
        return StubDepth()
    if name == "da2":
        return _Da2Depth(cfg)
    return _MarigoldDepth(cfg)
