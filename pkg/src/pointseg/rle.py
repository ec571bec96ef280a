"""Row-major run-length codec for binary masks.

Wire format: list of run lengths alternating background/foreground, first run
always background (possibly 0). Runs sum to H*W.
"""

import numpy as np


def encode(mask: np.ndarray) -> list:
    flat = np.asarray(mask, dtype=bool).ravel()
    if flat.size == 0:
        return []
    changes = np.flatnonzero(np.diff(flat.astype(np.int8)))
    bounds = np.concatenate([[0], changes + 1, [flat.size]])
    runs = np.diff(bounds).tolist()
    if flat[0]:  # first pixel is foreground: prepend an empty background run
        runs = [0] + runs
    return [int(r) for r in runs]


def decode(runs, shape) -> np.ndarray:
    total = shape[0] * shape[1]
    if sum(runs) != total:
        raise ValueError(f"runs sum to {sum(runs)}, expected {total}")
    flat = np.zeros(total, dtype=bool)
    pos = 0
    fg = False
    for r in runs:
        if fg:
            flat[pos:pos + r] = True
        pos += r
        fg = not fg
    return flat.reshape(shape)
