"""Aggregation and normalization of attention stacks into a transition operator.

A raw backbone emits per-block multi-head attention. The engine wants a single
(h*w) x (h*w) matrix that behaves like a Markov transition operator: first a
weighted head/block mean, then optional temperature sharpening, then iterative
proportional fitting until the matrix is doubly stochastic.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateRow, DimMismatch, NoConvergence, WeightError

IPF_TOL = 1e-4
IPF_MAX_ITER = 50


@dataclass
class AttentionTensor:
    mat: np.ndarray            # (h*w) x (h*w), nonnegative
    coarse_dims: tuple         # (h, w)
    stochasticity: str = "row"  # "row" or "doubly"

    @property
    def n_states(self):
        return self.mat.shape[0]


@dataclass
class BlockStack:
    """List of (weight, heads) where heads is N_heads x (h*w) x (h*w)."""

    blocks: list
    coarse_dims: tuple

    def normalized_weights(self):
        weights = np.array([w for w, _ in self.blocks], dtype=np.float64)
        if np.any(weights < 0):
            raise WeightError("block weights must be nonnegative")
        total = weights.sum()
        if total <= 0:
            raise WeightError("all block weights are zero")
        return weights / total


def aggregate(stack: BlockStack) -> AttentionTensor:
    """Weighted block average of per-block head means."""
    if not stack.blocks:
        raise WeightError("empty block stack")
    weights = stack.normalized_weights()
    n = stack.blocks[0][1].shape[-1]
    out = np.zeros((n, n), dtype=np.float64)
    for w_b, heads in zip(weights, (b for _, b in stack.blocks)):
        if heads.shape[-2:] != (n, n):
            raise DimMismatch(f"block dims {heads.shape[-2:]} != {(n, n)}")
        out += w_b * heads.mean(axis=0)
    return AttentionTensor(mat=out, coarse_dims=stack.coarse_dims, stochasticity="row")


def apply_temperature(a: AttentionTensor, beta: float) -> AttentionTensor:
    """Sharpen (beta > 1) or flatten (beta < 1) rows, then renormalize."""
    if beta <= 0:
        raise ValueError("beta must be positive")
    if beta == 1.0:
        return AttentionTensor(a.mat.copy(), a.coarse_dims, a.stochasticity)
    powered = np.power(a.mat, beta)
    sums = powered.sum(axis=1)
    dead = np.flatnonzero(sums <= 0)
    if dead.size:
        raise DegenerateRow(f"rows {dead[:5].tolist()} vanished at beta={beta}")
    return AttentionTensor(powered / sums[:, None], a.coarse_dims, "row")


def ipf_normalize(a: AttentionTensor, tol: float = IPF_TOL,
                  max_iter: int = IPF_MAX_ITER) -> AttentionTensor:
    """Sinkhorn-style alternating row/column normalization.

    Stops once every row and column sum is within tol of 1. Raises
    NoConvergence only if the residual is still more than 10x tol at the
    iteration cap; small overshoots are tolerated and tagged anyway.
    """
    mat = np.array(a.mat, dtype=np.float64)
    if np.any(mat < 0):
        raise ValueError("attention entries must be nonnegative")
    dev = _stochastic_deviation(mat)
    it = 0
    while dev > tol and it < max_iter:
        mat = mat / mat.sum(axis=1, keepdims=True)
        mat = mat / mat.sum(axis=0, keepdims=True)
        dev = _stochastic_deviation(mat)
        it += 1
    if dev > 10 * tol:
        raise NoConvergence(f"deviation {dev:.3e} after {max_iter} iterations")
    return AttentionTensor(mat, a.coarse_dims, "doubly")


def _stochastic_deviation(mat):
    return max(np.abs(mat.sum(axis=1) - 1.0).max(),
               np.abs(mat.sum(axis=0) - 1.0).max())


def mirror_permutation(coarse_dims):
    """State permutation corresponding to a horizontal image flip."""
    h, w = coarse_dims
    idx = np.arange(h * w).reshape(h, w)
    return idx[:, ::-1].reshape(-1)


def flip_average(a: AttentionTensor, a_flipped: AttentionTensor) -> AttentionTensor:
    """Average an operator with its horizontally-flipped twin.

    a_flipped was computed on the mirrored image, so both its source and
    target state indices are mirrored in x; un-mirror them before averaging.
    """
    if a.mat.shape != a_flipped.mat.shape:
        raise DimMismatch(f"{a.mat.shape} vs {a_flipped.mat.shape}")
    perm = mirror_permutation(a.coarse_dims)
    unflipped = a_flipped.mat[np.ix_(perm, perm)]
    mean = 0.5 * (a.mat + unflipped)
    sums = mean.sum(axis=1, keepdims=True)
    sums[sums == 0] = 1.0
    return AttentionTensor(mean / sums, a.coarse_dims, "row")
