"""Offline backbone runner producing pointseg interchange bundles."""

from .backbones import (AttentionBackbone, BackboneConfig, DepthBackbone,
                        ModelLoadError, load_attention_backbone,
                        load_depth_backbone)
from .extract import extract

__all__ = [
    "AttentionBackbone",
    "BackboneConfig",
    "DepthBackbone",
    "ModelLoadError",
    "extract",
    "load_attention_backbone",
    "load_depth_backbone",
]
