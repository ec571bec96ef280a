"""NPY v1.0 tensor files and bundle directories.

The interchange format between the offline extractor and this engine is
deliberately tiny: raw little-endian float32 in an NPY v1.0 container,
parsed and emitted here by hand so the trust boundary is explicit.
"""

import ast
import json
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image

from .errors import BadMagic, DimMismatch, DtypeMismatch, IoFailure, MissingFile, NonFinite

MAGIC = b"\x93NUMPY"
META_SCHEMA_VERSION = 1


@dataclass
class TensorFile:
    """A validated float32 tensor as stored on disk."""

    shape: tuple
    data: np.ndarray  # row-major float32, already reshaped

    def __post_init__(self):
        expect = 1
        for d in self.shape:
            expect *= d
        if self.data.size != expect:
            raise DimMismatch(f"buffer has {self.data.size} elements, shape {self.shape} wants {expect}")


@dataclass
class ImageBundle:
    """Image + inverse depth + attention operator, cross-validated."""

    image: np.ndarray          # H x W x 3 in [0, 1]
    depth: np.ndarray          # H x W in [0, 1]
    attention: np.ndarray      # (h*w) x (h*w) float
    coarse_dims: tuple         # (h, w)
    orig_dims: tuple           # (H0, W0) before any extractor resize
    gt_masks: dict = field(default_factory=dict)  # mask_id -> bool H0 x W0
    meta: dict = field(default_factory=dict)

    @property
    def dims(self):
        return self.image.shape[0], self.image.shape[1]


def _parse_header(f):
    magic = f.read(6)
    if magic != MAGIC:
        raise BadMagic(f"not an NPY file (magic {magic!r})")
    major, minor = f.read(2)
    if major != 1:
        raise BadMagic(f"unsupported NPY version {major}.{minor}")
    (hlen,) = struct.unpack("<H", f.read(2))
    header = f.read(hlen).decode("latin1")
    try:
        info = ast.literal_eval(header)
    except (ValueError, SyntaxError) as e:
        raise BadMagic(f"unparseable NPY header: {e}") from e
    return info


def load_tensor(path) -> TensorFile:
    """Read and validate one NPY v1.0 float32 tensor."""
    path = Path(path)
    if not path.exists():
        raise MissingFile(str(path))
    with open(path, "rb") as f:
        info = _parse_header(f)
        if info.get("descr") != "<f4":
            raise DtypeMismatch(f"dtype {info.get('descr')!r}, expected '<f4'")
        if info.get("fortran_order"):
            raise DtypeMismatch("fortran_order tensors not supported")
        shape = tuple(info["shape"])
        count = 1
        for d in shape:
            count *= d
        buf = f.read(4 * count)
    if len(buf) != 4 * count:
        raise DimMismatch(f"payload truncated: {len(buf)} bytes for shape {shape}")
    data = np.frombuffer(buf, dtype="<f4").reshape(shape)
    if not np.all(np.isfinite(data)):
        raise NonFinite(f"{path} contains NaN/Inf")
    return TensorFile(shape=shape, data=data)


def save_tensor(t: TensorFile, path):
    """Write a tensor readable back bit-exactly by load_tensor."""
    shape_repr = "(" + ", ".join(str(d) for d in t.shape) + ("," if len(t.shape) == 1 else "") + ")"
    header = f"{{'descr': '<f4', 'fortran_order': False, 'shape': {shape_repr}, }}"
    # header block (magic..newline) padded to a multiple of 64
    base = len(MAGIC) + 2 + 2
    pad = (64 - (base + len(header) + 1) % 64) % 64
    header = header + " " * pad + "\n"
    payload = np.ascontiguousarray(t.data, dtype="<f4").tobytes()
    try:
        with open(path, "wb") as f:
            f.write(MAGIC)
            f.write(bytes([1, 0]))
            f.write(struct.pack("<H", len(header)))
            f.write(header.encode("latin1"))
            f.write(payload)
    except OSError as e:
        raise IoFailure(f"cannot write {path}: {e}") from e


def load_mask_png(path) -> np.ndarray:
    """8-bit mask PNG -> bool array; any nonzero pixel is foreground."""
    with Image.open(path) as im:
        arr = np.asarray(im.convert("L"))
    return arr > 0


def save_mask_png(mask: np.ndarray, path):
    Image.fromarray((mask.astype(np.uint8)) * 255, mode="L").save(path)


def normalize_depth(depth: np.ndarray) -> np.ndarray:
    """Affine rescale to [0, 1]; a constant map becomes all zeros."""
    lo = float(depth.min())
    hi = float(depth.max())
    if hi - lo <= 0:
        return np.zeros_like(depth, dtype=np.float64)
    return (depth.astype(np.float64) - lo) / (hi - lo)


def load_bundle(directory) -> ImageBundle:
    """Load and cross-validate one bundle directory."""
    directory = Path(directory)
    for name in ("image.png", "depth.npy", "attn.npy", "meta.json"):
        if not (directory / name).exists():
            raise MissingFile(str(directory / name))
    with open(directory / "meta.json") as f:
        meta = json.load(f)
    h, w = int(meta["h"]), int(meta["w"])
    with Image.open(directory / "image.png") as im:
        image = np.asarray(im.convert("RGB"), dtype=np.float64) / 255.0
    depth = load_tensor(directory / "depth.npy").data.astype(np.float64)
    attn = load_tensor(directory / "attn.npy").data.astype(np.float64)
    H, W = image.shape[0], image.shape[1]
    if depth.shape != (H, W):
        raise DimMismatch(f"depth {depth.shape} vs image {(H, W)}")
    if attn.ndim != 2 or attn.shape[0] != attn.shape[1]:
        raise DimMismatch(f"attention must be square, got {attn.shape}")
    if attn.shape[0] != h * w:
        raise DimMismatch(f"attention side {attn.shape[0]} != h*w = {h * w}")
    depth = normalize_depth(depth)
    orig = (int(meta.get("orig_height", H)), int(meta.get("orig_width", W)))
    gt = {}
    gt_dir = directory / "gt"
    if gt_dir.is_dir():
        for p in sorted(gt_dir.glob("*.png")):
            gt[p.stem] = load_mask_png(p)
    return ImageBundle(image=image, depth=depth, attention=attn,
                       coarse_dims=(h, w), orig_dims=orig, gt_masks=gt, meta=meta)


def save_bundle(directory, image, depth, attention, coarse_dims, orig_dims=None,
                gt_masks=None, extra_meta=None):
    """Emit a bundle directory in the layout load_bundle expects."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    H, W = image.shape[0], image.shape[1]
    img8 = np.clip(np.round(image * 255.0), 0, 255).astype(np.uint8)
    Image.fromarray(img8, mode="RGB").save(directory / "image.png")
    save_tensor(TensorFile(depth.shape, depth.astype("<f4")), directory / "depth.npy")
    save_tensor(TensorFile(attention.shape, attention.astype("<f4")), directory / "attn.npy")
    meta = {
        "schema_version": META_SCHEMA_VERSION,
        "h": int(coarse_dims[0]),
        "w": int(coarse_dims[1]),
        "orig_height": int(orig_dims[0]) if orig_dims else H,
        "orig_width": int(orig_dims[1]) if orig_dims else W,
    }
    if extra_meta:
        meta.update(extra_meta)
    with open(directory / "meta.json", "w") as f:
        json.dump(meta, f, indent=2, sort_keys=True)
    if gt_masks:
        (directory / "gt").mkdir(exist_ok=True)
        for mask_id, mask in gt_masks.items():
            save_mask_png(mask, directory / "gt" / f"{mask_id}.png")
    return directory
