# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled hot kernels: depth-guided JBU, geodesic fill, candidate area scan.

Each kernel has a pure-Python twin in _kernels_py.py with identical float
semantics (same operations in the same order), selected in _backend.py.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp, sqrt, floor, INFINITY


def jbu_filter(double[:, ::1] src, double[:, :, ::1] guide,
               double sigma_s, double sigma_r, int radius):
    cdef int h = src.shape[0], w = src.shape[1]
    cdef int H = guide.shape[0], W = guide.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out_arr = np.zeros((H, W))
    cdef cnp.ndarray[cnp.uint8_t, ndim=2] flag_arr = np.zeros((H, W), dtype=np.uint8)
    cdef double[:, ::1] out = out_arr
    cdef cnp.uint8_t[:, ::1] flags = flag_arr
    cdef double inv2ss = 1.0 / (2.0 * sigma_s * sigma_s)
    cdef double inv2sr = 1.0 / (2.0 * sigma_r * sigma_r)
    cdef int Y, X, cy, cx, dy, dx, py, px, uy, ux, c
    cdef double gy, gx, ws, wr, d2, diff, wgt, total, acc, sp_total, sp_acc

    for Y in range(H):
        for X in range(W):
            gy = (Y + 0.5) * h / H - 0.5
            gx = (X + 0.5) * w / W - 0.5
            cy = <int>floor(gy + 0.5)
            cx = <int>floor(gx + 0.5)
            total = 0.0
            acc = 0.0
            sp_total = 0.0
            sp_acc = 0.0
            for dy in range(-radius, radius + 1):
                py = cy + dy
                if py < 0 or py >= h:
                    continue
                for dx in range(-radius, radius + 1):
                    px = cx + dx
                    if px < 0 or px >= w:
                        continue
                    ws = exp(-((py - gy) * (py - gy) + (px - gx) * (px - gx)) * inv2ss)
                    uy = <int>floor((py + 0.5) * H / h - 0.5 + 0.5)
                    if uy < 0:
                        uy = 0
                    if uy >= H:
                        uy = H - 1
                    ux = <int>floor((px + 0.5) * W / w - 0.5 + 0.5)
                    if ux < 0:
                        ux = 0
                    if ux >= W:
                        ux = W - 1
                    d2 = 0.0
                    for c in range(4):
                        diff = guide[Y, X, c] - guide[uy, ux, c]
                        d2 += diff * diff
                    wr = exp(-d2 * inv2sr)
                    wgt = ws * wr
                    total += wgt
                    acc += wgt * src[py, px]
                    sp_total += ws
                    sp_acc += ws * src[py, px]
            if total > 0.0:
                out[Y, X] = acc / total
            else:
                # all bilateral weights underflowed; spatial-only fallback
                out[Y, X] = sp_acc / sp_total
                flags[Y, X] = 1
    return out_arr, flag_arr


cdef inline bint _heap_less(double ca, long ia, double cb, long ib) nogil:
    if ca != cb:
        return ca < cb
    return ia < ib


def geodesic_fill(double[:, ::1] field, double[:, ::1] depth,
                  int seed_r, int seed_c, double w_d, int conn):
    """Dijkstra over the pixel grid; edge cost = hypot(dField, w_d * dDepth)."""
    cdef int H = field.shape[0], W = field.shape[1]
    cdef long n = <long>H * W
    cdef cnp.ndarray[cnp.float64_t, ndim=2] dist_arr = np.full((H, W), np.inf)
    cdef double[:, ::1] dist = dist_arr
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] done_arr = np.zeros(n, dtype=np.uint8)
    cdef cnp.uint8_t[::1] done = done_arr
    # binary heap keyed on (cost, row-major index) for a total order
    cdef cnp.ndarray[cnp.float64_t, ndim=1] hc_arr = np.empty(n * 4 + 16)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] hi_arr = np.empty(n * 4 + 16, dtype=np.int64)
    cdef double[::1] hcost = hc_arr
    cdef long[::1] hidx = hi_arr
    cdef long size = 0, cap = hc_arr.shape[0]
    cdef long i, j, parent, child, idx, nidx
    cdef int r, c, nr, nc, k, nn
    cdef double cost, step, df, dd, ncost
    cdef int[8] dr
    cdef int[8] dc
    dr[0] = -1; dc[0] = 0
    dr[1] = 0; dc[1] = -1
    dr[2] = 0; dc[2] = 1
    dr[3] = 1; dc[3] = 0
    dr[4] = -1; dc[4] = -1
    dr[5] = -1; dc[5] = 1
    dr[6] = 1; dc[6] = -1
    dr[7] = 1; dc[7] = 1
    nn = 4 if conn == 4 else 8

    dist[seed_r, seed_c] = 0.0
    hcost[0] = 0.0
    hidx[0] = <long>seed_r * W + seed_c
    size = 1
    while size > 0:
        cost = hcost[0]
        idx = hidx[0]
        size -= 1
        hcost[0] = hcost[size]
        hidx[0] = hidx[size]
        # sift down
        i = 0
        while True:
            child = 2 * i + 1
            if child >= size:
                break
            if child + 1 < size and _heap_less(hcost[child + 1], hidx[child + 1],
                                               hcost[child], hidx[child]):
                child += 1
            if _heap_less(hcost[child], hidx[child], hcost[i], hidx[i]):
                hcost[i], hcost[child] = hcost[child], hcost[i]
                hidx[i], hidx[child] = hidx[child], hidx[i]
                i = child
            else:
                break
        if done[idx]:
            continue
        done[idx] = 1
        r = <int>(idx // W)
        c = <int>(idx % W)
        for k in range(nn):
            nr = r + dr[k]
            nc = c + dc[k]
            if nr < 0 or nr >= H or nc < 0 or nc >= W:
                continue
            nidx = <long>nr * W + nc
            if done[nidx]:
                continue
            df = field[r, c] - field[nr, nc]
            dd = w_d * (depth[r, c] - depth[nr, nc])
            step = sqrt(df * df + dd * dd)
            ncost = cost + step
            if ncost < dist[nr, nc]:
                dist[nr, nc] = ncost
                # push (lazy delete; stale entries skipped via done[])
                if size >= cap:
                    raise MemoryError("geodesic heap overflow")
                hcost[size] = ncost
                hidx[size] = nidx
                i = size
                size += 1
                while i > 0:
                    parent = (i - 1) // 2
                    if _heap_less(hcost[i], hidx[i], hcost[parent], hidx[parent]):
                        hcost[i], hcost[parent] = hcost[parent], hcost[i]
                        hidx[i], hidx[parent] = hidx[parent], hidx[i]
                        i = parent
                    else:
                        break
    return dist_arr


def fused_area_scan(double[::1] a, double[::1] b, cnp.uint8_t[::1] tie_win,
                    cnp.uint8_t[::1] f_other, int y_fg, double[::1] lambdas):
    """Foreground area of the fused mask for each candidate divisor.

    a: this point's map (flat), b: min over the other scaled maps,
    tie_win: whether this point wins exact ties, f_other: whether the pixel
    is foreground when the other maps win.
    """
    cdef long n = a.shape[0]
    cdef int nc = lambdas.shape[0]
    cdef cnp.ndarray[cnp.int64_t, ndim=1] areas_arr = np.zeros(nc, dtype=np.int64)
    cdef long[::1] areas = areas_arr
    cdef int ci
    cdef long q, count
    cdef double lam, s
    cdef bint win
    for ci in range(nc):
        lam = lambdas[ci]
        count = 0
        for q in range(n):
            s = a[q] / lam
            win = s < b[q] or (s == b[q] and tie_win[q])
            if win:
                if y_fg and s <= 1.0:
                    count += 1
            elif f_other[q]:
                count += 1
        areas[ci] = count
    return areas_arr
