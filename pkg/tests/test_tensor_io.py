"""NPY codec and bundle round-trips, plus the error paths."""

import json
import struct

import numpy as np
import pytest

from pointseg import errors
from pointseg.tensor_io import (
    ImageBundle,
    TensorFile,
    load_bundle,
    load_tensor,
    normalize_depth,
    save_bundle,
    save_tensor,
)


def _roundtrip(tmp_path, arr):
    path = tmp_path / "t.npy"
    save_tensor(TensorFile(arr.shape, arr.astype("<f4")), path)
    return load_tensor(path)


def test_roundtrip_bitexact(tmp_path):
    rng = np.random.default_rng(0)
    arr = rng.standard_normal((7, 5)).astype("<f4")
    back = _roundtrip(tmp_path, arr)
    assert back.shape == (7, 5)
    assert back.data.tobytes() == arr.tobytes()


def test_roundtrip_1d_and_3d(tmp_path):
    for shape in [(4,), (2, 3, 4)]:
        arr = np.arange(np.prod(shape), dtype="<f4").reshape(shape)
        back = _roundtrip(tmp_path, arr)
        assert back.shape == shape
        np.testing.assert_array_equal(back.data, arr)


def test_numpy_can_read_our_files(tmp_path):
    # interop: the hand-rolled writer must produce files np.load accepts
    arr = np.linspace(0, 1, 12, dtype="<f4").reshape(3, 4)
    path = tmp_path / "t.npy"
    save_tensor(TensorFile(arr.shape, arr), path)
    np.testing.assert_array_equal(np.load(path), arr)


def test_we_can_read_numpy_files(tmp_path):
    arr = np.random.default_rng(1).random((6, 6)).astype("<f4")
    path = tmp_path / "np.npy"
    np.save(path, arr)
    back = load_tensor(path)
    np.testing.assert_array_equal(back.data, arr)


def test_bad_magic(tmp_path):
    path = tmp_path / "bad.npy"
    path.write_bytes(b"NOTNPY" + b"\x00" * 32)
    with pytest.raises(errors.BadMagic):
        load_tensor(path)


def test_wrong_dtype_rejected(tmp_path):
    path = tmp_path / "f8.npy"
    np.save(path, np.zeros((2, 2), dtype=np.float64))
    with pytest.raises(errors.DtypeMismatch):
        load_tensor(path)


def test_fortran_order_rejected(tmp_path):
    path = tmp_path / "f.npy"
    np.save(path, np.asfortranarray(np.zeros((3, 2), dtype="<f4")))
    with pytest.raises(errors.DtypeMismatch):
        load_tensor(path)


def test_nonfinite_rejected(tmp_path):
    arr = np.zeros((2, 2), dtype="<f4")
    arr[0, 1] = np.nan
    path = tmp_path / "nan.npy"
    save_tensor(TensorFile(arr.shape, arr), path)
    with pytest.raises(errors.NonFinite):
        load_tensor(path)


def test_truncated_payload(tmp_path):
    arr = np.zeros((4, 4), dtype="<f4")
    path = tmp_path / "trunc.npy"
    save_tensor(TensorFile(arr.shape, arr), path)
    blob = path.read_bytes()
    path.write_bytes(blob[:-8])
    with pytest.raises(errors.DimMismatch):
        load_tensor(path)


def test_missing_file(tmp_path):
    with pytest.raises(errors.MissingFile):
        load_tensor(tmp_path / "nope.npy")


def test_tensorfile_shape_check():
    with pytest.raises(errors.DimMismatch):
        TensorFile((3, 3), np.zeros(4, dtype="<f4"))


def test_normalize_depth():
    d = np.array([[2.0, 4.0], [6.0, 2.0]])
    out = normalize_depth(d)
    assert out.min() == 0.0 and out.max() == 1.0
    np.testing.assert_allclose(out, (d - 2.0) / 4.0)


def test_normalize_depth_constant_is_zeros():
    out = normalize_depth(np.full((3, 3), 7.0))
    np.testing.assert_array_equal(out, np.zeros((3, 3)))


def _tiny_bundle_arrays(h=2, w=2, H=8, W=8, seed=0):
    rng = np.random.default_rng(seed)
    image = rng.random((H, W, 3))
    depth = rng.random((H, W))
    attn = rng.random((h * w, h * w)) + 0.1
    attn /= attn.sum(axis=1, keepdims=True)
    return image, depth, attn


def test_bundle_roundtrip(tmp_path):
    image, depth, attn = _tiny_bundle_arrays()
    gt = {"a": np.eye(8, dtype=bool)}
    d = save_bundle(tmp_path / "b", image, depth, attn, (2, 2), gt_masks=gt,
                    extra_meta={"note": "x"})
    bundle = load_bundle(d)
    assert isinstance(bundle, ImageBundle)
    assert bundle.dims == (8, 8)
    assert bundle.coarse_dims == (2, 2)
    assert bundle.orig_dims == (8, 8)
    assert bundle.meta["schema_version"] == 1
    assert bundle.meta["note"] == "x"
    # depth comes back renormalized to [0,1], image quantized to 8 bits
    assert bundle.depth.min() == 0.0 and bundle.depth.max() == 1.0
    assert np.abs(bundle.image - image).max() <= 0.5 / 255 + 1e-9
    np.testing.assert_array_equal(bundle.gt_masks["a"], gt["a"])
    np.testing.assert_allclose(bundle.attention, attn, atol=1e-6)


def test_bundle_missing_required_file(tmp_path):
    image, depth, attn = _tiny_bundle_arrays()
    d = save_bundle(tmp_path / "b", image, depth, attn, (2, 2))
    (d / "attn.npy").unlink()
    with pytest.raises(errors.MissingFile):
        load_bundle(d)


def test_bundle_dim_crosschecks(tmp_path):
    image, depth, attn = _tiny_bundle_arrays()
    d = save_bundle(tmp_path / "b", image, depth, attn, (2, 2))
    # lie about the coarse grid -> attention side no longer matches h*w
    meta = json.loads((d / "meta.json").read_text())
    meta["h"] = 3
    (d / "meta.json").write_text(json.dumps(meta))
    with pytest.raises(errors.DimMismatch):
        load_bundle(d)


def test_bundle_depth_shape_mismatch(tmp_path):
    image, depth, attn = _tiny_bundle_arrays()
    d = save_bundle(tmp_path / "b", image, depth, attn, (2, 2))
    save_tensor(TensorFile((4, 4), np.zeros((4, 4), dtype="<f4")), d / "depth.npy")
    with pytest.raises(errors.DimMismatch):
        load_bundle(d)


def test_header_is_npy_v1(tmp_path):
    path = tmp_path / "v.npy"
    save_tensor(TensorFile((2,), np.zeros(2, dtype="<f4")), path)
    blob = path.read_bytes()
    assert blob[:6] == b"\x93NUMPY"
    assert blob[6:8] == bytes([1, 0])
    (hlen,) = struct.unpack("<H", blob[8:10])
    # NPY v1 spec: magic+version+len+header padded to a multiple of 64
    assert (10 + hlen) % 64 == 0
