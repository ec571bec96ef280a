"""Iteration-count maps from a doubly stochastic transition operator.

Starting from a one-hot distribution at the prompt's coarse state, the chain
is evolved by repeated vector-matrix products. Each state records the first
iteration at which its relative probability p_t[k] / max(p_t) exceeds tau.
States never crossing the threshold within t_max iterations keep t_max,
encoding "semantically unreachable".
"""

from dataclasses import dataclass

import numpy as np

from .attention import AttentionTensor
from .errors import NotDoublyStochastic, SeedOutOfRange

TAU_DEFAULT = 0.4
T_MAX_DEFAULT = 64


@dataclass
class CoarseMarkovMap:
    values: np.ndarray   # h x w float grid of iteration counts
    seed: int            # coarse state index
    tau: float
    t_max: int


def markov_map(a: AttentionTensor, seed: int, tau: float = TAU_DEFAULT,
               t_max: int = T_MAX_DEFAULT) -> CoarseMarkovMap:
    if a.stochasticity != "doubly":
        raise NotDoublyStochastic("operator must be IPF-normalized first")
    n = a.n_states
    if not (0 <= seed < n):
        raise SeedOutOfRange(f"seed {seed} for {n} states")
    if not (0.0 < tau < 1.0):
        raise ValueError("tau must lie in (0, 1); tau=1 makes the strict threshold vacuous")

    m = np.full(n, float(t_max))
    m[seed] = 0.0  # p_0[seed]/max(p_0) = 1 > tau
    unassigned = m > 0
    p = np.zeros(n)
    p[seed] = 1.0
    for t in range(1, t_max + 1):
        if not unassigned.any():
            break
        p = p @ a.mat
        reached = unassigned & (p / p.max() > tau)
        m[reached] = t
        unassigned &= ~reached
    h, w = a.coarse_dims
    return CoarseMarkovMap(values=m.reshape(h, w), seed=seed, tau=tau, t_max=t_max)


def markov_maps_batch(a: AttentionTensor, seeds, tau: float = TAU_DEFAULT,
                      t_max: int = T_MAX_DEFAULT):
    return [markov_map(a, s, tau, t_max) for s in seeds]
