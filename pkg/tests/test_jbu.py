"""Guided upsampling against a direct-formula oracle."""

import numpy as np
import pytest

from pointseg import errors
from pointseg.jbu import JbuParams, jbu_upsample, make_guide
from pointseg.markov import CoarseMarkovMap


def _cmap(values):
    values = np.asarray(values, dtype=np.float64)
    return CoarseMarkovMap(values=values, seed=0, tau=0.4, t_max=64)


def _oracle(src, guide, sigma_s, sigma_r, radius):
    """Independent per-pixel evaluation of the filter formula."""
    h, w = src.shape
    H, W = guide.shape[:2]
    out = np.zeros((H, W))
    for Y in range(H):
        for X in range(W):
            gy = (Y + 0.5) * h / H - 0.5
            gx = (X + 0.5) * w / W - 0.5
            cy, cx = int(np.floor(gy + 0.5)), int(np.floor(gx + 0.5))
            num = den = snum = sden = 0.0
            for py in range(max(cy - radius, 0), min(cy + radius, h - 1) + 1):
                for px in range(max(cx - radius, 0), min(cx + radius, w - 1) + 1):
                    ws = np.exp(-((py - gy) ** 2 + (px - gx) ** 2)
                                / (2 * sigma_s ** 2))
                    uy = int(np.clip(np.floor((py + 0.5) * H / h), 0, H - 1))
                    ux = int(np.clip(np.floor((px + 0.5) * W / w), 0, W - 1))
                    d2 = float(((guide[Y, X] - guide[uy, ux]) ** 2).sum())
                    wgt = ws * np.exp(-d2 / (2 * sigma_r ** 2))
                    num += wgt * src[py, px]
                    den += wgt
                    snum += ws * src[py, px]
                    sden += ws
            out[Y, X] = num / den if den > 0 else snum / sden
    return out


@pytest.mark.parametrize("seed", range(10))
def test_matches_direct_formula(seed):
    rng = np.random.default_rng(seed)
    src = rng.random((4, 4)) * 10
    guide = rng.random((16, 16, 4))
    params = JbuParams(progressive=False)
    got = jbu_upsample(_cmap(src), guide, params)
    want = _oracle(src, guide, params.sigma_spatial, params.sigma_range,
                   params.radius)
    np.testing.assert_allclose(got, want, atol=1e-5)


def test_constant_map_stays_constant():
    guide = np.random.default_rng(0).random((12, 12, 4))
    out = jbu_upsample(_cmap(np.full((3, 3), 5.0)), guide,
                       JbuParams(progressive=False))
    np.testing.assert_allclose(out, 5.0)


def test_progressive_matches_shape_and_range():
    rng = np.random.default_rng(2)
    src = rng.integers(0, 64, size=(4, 4)).astype(float)
    guide = rng.random((32, 32, 4))
    out = jbu_upsample(_cmap(src), guide, JbuParams(progressive=True))
    assert out.shape == (32, 32)
    assert out.min() >= src.min() - 1e-9
    assert out.max() <= src.max() + 1e-9


def test_guide_respects_edges():
    # two flat halves in the guide keep the upsampled step sharp
    src = np.zeros((2, 2))
    src[:, 1] = 10.0
    guide = np.zeros((8, 8, 4))
    guide[:, 4:, :] = 1.0
    out = jbu_upsample(_cmap(src), guide, JbuParams(progressive=False))
    assert out[:, :4].max() < 1.0          # left stays near 0
    assert out[:, 4:].min() > 9.0          # right stays near 10


def test_range_underflow_falls_back_to_spatial():
    # guide distance so large the range weight underflows to exactly 0
    src = np.array([[0.0, 1.0], [2.0, 3.0]])
    guide = np.zeros((4, 4, 4))
    guide[0, 0] = 1e6  # absurd guide value at one output pixel
    out, flags = jbu_upsample(_cmap(src), guide,
                              JbuParams(sigma_range=1e-3, progressive=False),
                              return_flags=True)
    assert flags[0, 0]
    assert np.isfinite(out).all()


def test_make_guide_stacks_rgbd():
    img = np.random.default_rng(1).random((5, 6, 3))
    depth = np.random.default_rng(2).random((5, 6))
    g = make_guide(img, depth)
    assert g.shape == (5, 6, 4)
    np.testing.assert_array_equal(g[..., :3], img)
    np.testing.assert_array_equal(g[..., 3], depth)


def test_make_guide_dim_mismatch():
    with pytest.raises(errors.DimMismatch):
        make_guide(np.zeros((4, 4, 3)), np.zeros((5, 5)))


def test_guide_smaller_than_source():
    with pytest.raises(errors.DimMismatch):
        jbu_upsample(_cmap(np.zeros((8, 8))), np.zeros((4, 4, 4)), JbuParams())


def test_bad_params():
    with pytest.raises(ValueError):
        JbuParams(sigma_spatial=0)
    with pytest.raises(ValueError):
        JbuParams(sigma_range=-1)
    with pytest.raises(ValueError):
        JbuParams(radius=0)
