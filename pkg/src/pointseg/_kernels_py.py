"""Pure-Python fallbacks for the compiled kernels.

Same arithmetic, same operation order as _kernels_c.pyx, so results are
bitwise-identical; only the speed differs. Selected by _backend.py when the
extension is unavailable or POINTSEG_PURE=1.
"""

import heapq
import math

import numpy as np


def jbu_filter(src, guide, sigma_s, sigma_r, radius):
    h, w = src.shape
    H, W = guide.shape[0], guide.shape[1]
    out = np.zeros((H, W))
    flags = np.zeros((H, W), dtype=np.uint8)
    inv2ss = 1.0 / (2.0 * sigma_s * sigma_s)
    inv2sr = 1.0 / (2.0 * sigma_r * sigma_r)
    for Y in range(H):
        for X in range(W):
            gy = (Y + 0.5) * h / H - 0.5
            gx = (X + 0.5) * w / W - 0.5
            cy = int(math.floor(gy + 0.5))
            cx = int(math.floor(gx + 0.5))
            total = acc = sp_total = sp_acc = 0.0
            for dy in range(-radius, radius + 1):
                py = cy + dy
                if py < 0 or py >= h:
                    continue
                for dx in range(-radius, radius + 1):
                    px = cx + dx
                    if px < 0 or px >= w:
                        continue
                    ws = math.exp(-((py - gy) * (py - gy) + (px - gx) * (px - gx)) * inv2ss)
                    uy = int(math.floor((py + 0.5) * H / h - 0.5 + 0.5))
                    uy = 0 if uy < 0 else (H - 1 if uy >= H else uy)
                    ux = int(math.floor((px + 0.5) * W / w - 0.5 + 0.5))
                    ux = 0 if ux < 0 else (W - 1 if ux >= W else ux)
                    d2 = 0.0
                    for c in range(4):
                        diff = guide[Y, X, c] - guide[uy, ux, c]
                        d2 += diff * diff
                    wr = math.exp(-d2 * inv2sr)
                    wgt = ws * wr
                    total += wgt
                    acc += wgt * src[py, px]
                    sp_total += ws
                    sp_acc += ws * src[py, px]
            if total > 0.0:
                out[Y, X] = acc / total
            else:
                out[Y, X] = sp_acc / sp_total
                flags[Y, X] = 1
    return out, flags


_OFFSETS = ((-1, 0), (0, -1), (0, 1), (1, 0),
            (-1, -1), (-1, 1), (1, -1), (1, 1))


def geodesic_fill(field, depth, seed_r, seed_c, w_d, conn):
    H, W = field.shape
    nn = 4 if conn == 4 else 8
    dist = np.full((H, W), np.inf)
    done = np.zeros(H * W, dtype=bool)
    dist[seed_r, seed_c] = 0.0
    heap = [(0.0, seed_r * W + seed_c)]
    while heap:
        cost, idx = heapq.heappop(heap)
        if done[idx]:
            continue
        done[idx] = True
        r, c = divmod(idx, W)
        for k in range(nn):
            nr = r + _OFFSETS[k][0]
            nc = c + _OFFSETS[k][1]
            if nr < 0 or nr >= H or nc < 0 or nc >= W:
                continue
            nidx = nr * W + nc
            if done[nidx]:
                continue
            df = field[r, c] - field[nr, nc]
            dd = w_d * (depth[r, c] - depth[nr, nc])
            ncost = cost + math.sqrt(df * df + dd * dd)
            if ncost < dist[nr, nc]:
                dist[nr, nc] = ncost
                heapq.heappush(heap, (ncost, nidx))
    return dist


def fused_area_scan(a, b, tie_win, f_other, y_fg, lambdas):
    tie = tie_win.astype(bool)
    fo = f_other.astype(bool)
    areas = np.zeros(len(lambdas), dtype=np.int64)
    for ci, lam in enumerate(lambdas):
        s = a / lam
        win = (s < b) | ((s == b) & tie)
        if y_fg:
            count = int((win & (s <= 1.0)).sum())
        else:
            count = 0
        areas[ci] = count + int((~win & fo).sum())
    return areas
