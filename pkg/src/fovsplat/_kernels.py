"""Numba kernels for tile-based splat blending and pyramid compositing.

Fragment math uses ``math.exp`` so the pure-Python test oracles (which also
call ``math.exp``) can match bit-for-bit; numpy's SIMD exp differs by 1 ulp
on some inputs. Tiles own disjoint pixels, so prange scheduling cannot
change any output value.
"""

import math

import numpy as np
from numba import njit, prange

ALPHA_MIN = 1.0 / 255.0
T_MIN = 1e-4
TILE = 16


@njit(inline="always")
def _frag_alpha(px, py, mx, my, ca, cb, cc, op):
    dx = px - mx
    dy = py - my
    q = ca * dx * dx + 2.0 * cb * dx * dy + cc * dy * dy
    return op * math.exp(-0.5 * q)


@njit(inline="always")
def _frag_depth(px, py, fx, fy, cx, cy, a00, a01, a02, a11, a12, a22, b0, b1, b2):
    # camera-space z of the max-contribution point along the pixel ray
    rx = (px - cx) / fx
    ry = (py - cy) / fy
    den = a00 * rx * rx + a11 * ry * ry + a22 + 2.0 * (a01 * rx * ry + a02 * rx + a12 * ry)
    num = b0 * rx + b1 * ry + b2
    return num / den


@njit(parallel=True, cache=True)
def rasterize_global(mean2d, conic, z, opacity, color, tile_off, tile_items,
                     width, height, out_color, out_alpha, out_depth, out_count):
    """Blend in one global primitive order (items pre-sorted per tile)."""
    ntx = (width + TILE - 1) // TILE
    nty = (height + TILE - 1) // TILE
    for tid in prange(ntx * nty):
        ty = tid // ntx
        tx = tid % ntx
        x0 = tx * TILE
        y0 = ty * TILE
        x1 = min(x0 + TILE, width)
        y1 = min(y0 + TILE, height)
        lo = tile_off[tid]
        hi = tile_off[tid + 1]
        for iy in range(y0, y1):
            py = iy + 0.5
            for ix in range(x0, x1):
                px = ix + 0.5
                cr = 0.0
                cg = 0.0
                cb = 0.0
                aa = 0.0
                dd = 0.0
                t = 1.0
                n = 0
                for k in range(lo, hi):
                    s = tile_items[k]
                    alpha = _frag_alpha(px, py, mean2d[s, 0], mean2d[s, 1],
                                        conic[s, 0], conic[s, 1], conic[s, 2], opacity[s])
                    if alpha < ALPHA_MIN:
                        continue
                    n += 1
                    w = alpha * t
                    cr += color[s, 0] * w
                    cg += color[s, 1] * w
                    cb += color[s, 2] * w
                    aa += w
                    dd += z[s] * w
                    t *= (1.0 - alpha)
                    if t < T_MIN:
                        break
                out_color[iy, ix, 0] = cr
                out_color[iy, ix, 1] = cg
                out_color[iy, ix, 2] = cb
                out_alpha[iy, ix] = aa
                out_depth[iy, ix] = dd
                out_count[iy, ix] = n


@njit(parallel=True, cache=True)
def rasterize_exact(mean2d, conic, opacity, color, amat, bvec, tile_off, tile_items,
                    fx, fy, cx, cy, width, height,
                    out_color, out_alpha, out_depth, out_count):
    """Gather every contributing fragment per pixel, sort by depth, blend.

    out_count holds the full per-pixel fragment count (alpha >= 1/255),
    independent of transmittance early-out.
    """
    ntx = (width + TILE - 1) // TILE
    nty = (height + TILE - 1) // TILE
    for tid in prange(ntx * nty):
        ty = tid // ntx
        tx = tid % ntx
        x0 = tx * TILE
        y0 = ty * TILE
        x1 = min(x0 + TILE, width)
        y1 = min(y0 + TILE, height)
        lo = tile_off[tid]
        hi = tile_off[tid + 1]
        cap = hi - lo
        if cap == 0:
            for iy in range(y0, y1):
                for ix in range(x0, x1):
                    out_color[iy, ix, 0] = 0.0
                    out_color[iy, ix, 1] = 0.0
                    out_color[iy, ix, 2] = 0.0
                    out_alpha[iy, ix] = 0.0
                    out_depth[iy, ix] = 0.0
                    out_count[iy, ix] = 0
            continue
        fd = np.empty(cap, dtype=np.float64)
        fa = np.empty(cap, dtype=np.float64)
        fr = np.empty(cap, dtype=np.float64)
        fg = np.empty(cap, dtype=np.float64)
        fb = np.empty(cap, dtype=np.float64)
        fi = np.empty(cap, dtype=np.int64)
        for iy in range(y0, y1):
            py = iy + 0.5
            for ix in range(x0, x1):
                px = ix + 0.5
                n = 0
                for k in range(lo, hi):
                    s = tile_items[k]
                    alpha = _frag_alpha(px, py, mean2d[s, 0], mean2d[s, 1],
                                        conic[s, 0], conic[s, 1], conic[s, 2], opacity[s])
                    if alpha < ALPHA_MIN:
                        continue
                    d = _frag_depth(px, py, fx, fy, cx, cy,
                                    amat[s, 0], amat[s, 1], amat[s, 2],
                                    amat[s, 3], amat[s, 4], amat[s, 5],
                                    bvec[s, 0], bvec[s, 1], bvec[s, 2])
                    # insertion sort by (depth, splat index)
                    j = n
                    while j > 0 and (fd[j - 1] > d or (fd[j - 1] == d and fi[j - 1] > s)):
                        fd[j] = fd[j - 1]
                        fa[j] = fa[j - 1]
                        fr[j] = fr[j - 1]
                        fg[j] = fg[j - 1]
                        fb[j] = fb[j - 1]
                        fi[j] = fi[j - 1]
                        j -= 1
                    fd[j] = d
                    fa[j] = alpha
                    fr[j] = color[s, 0]
                    fg[j] = color[s, 1]
                    fb[j] = color[s, 2]
                    fi[j] = s
                    n += 1
                cr = 0.0
                cg = 0.0
                cb = 0.0
                aa = 0.0
                dd = 0.0
                t = 1.0
                for j in range(n):
                    alpha = fa[j]
                    w = alpha * t
                    cr += fr[j] * w
                    cg += fg[j] * w
                    cb += fb[j] * w
                    aa += w
                    dd += fd[j] * w
                    t *= (1.0 - alpha)
                    if t < T_MIN:
                        break
                out_color[iy, ix, 0] = cr
                out_color[iy, ix, 1] = cg
                out_color[iy, ix, 2] = cb
                out_alpha[iy, ix] = aa
                out_depth[iy, ix] = dd
                out_count[iy, ix] = n


@njit(parallel=True, cache=True)
def rasterize_hier(mean2d, conic, opacity, color, amat, bvec, tile_off, tile_items,
                   fx, fy, cx, cy, width, height, k_window,
                   out_color, out_alpha, out_depth, out_count):
    """Per-pixel K-window resort over tile-sorted fragments.

    Items arrive in tile-local primitive depth order; a sliding window of
    k_window fragments is kept sorted by per-pixel depth. Equals the exact
    mode wherever the per-pixel fragment count fits in the window.
    """
    ntx = (width + TILE - 1) // TILE
    nty = (height + TILE - 1) // TILE
    for tid in prange(ntx * nty):
        ty = tid // ntx
        tx = tid % ntx
        x0 = tx * TILE
        y0 = ty * TILE
        x1 = min(x0 + TILE, width)
        y1 = min(y0 + TILE, height)
        lo = tile_off[tid]
        hi = tile_off[tid + 1]
        wd = np.empty(k_window, dtype=np.float64)
        wa = np.empty(k_window, dtype=np.float64)
        wr = np.empty(k_window, dtype=np.float64)
        wg = np.empty(k_window, dtype=np.float64)
        wb = np.empty(k_window, dtype=np.float64)
        wi = np.empty(k_window, dtype=np.int64)
        for iy in range(y0, y1):
            py = iy + 0.5
            for ix in range(x0, x1):
                px = ix + 0.5
                cr = 0.0
                cg = 0.0
                cb = 0.0
                aa = 0.0
                dd = 0.0
                t = 1.0
                n = 0
                nwin = 0
                saturated = False
                for k in range(lo, hi):
                    s = tile_items[k]
                    alpha = _frag_alpha(px, py, mean2d[s, 0], mean2d[s, 1],
                                        conic[s, 0], conic[s, 1], conic[s, 2], opacity[s])
                    if alpha < ALPHA_MIN:
                        continue
                    d = _frag_depth(px, py, fx, fy, cx, cy,
                                    amat[s, 0], amat[s, 1], amat[s, 2],
                                    amat[s, 3], amat[s, 4], amat[s, 5],
                                    bvec[s, 0], bvec[s, 1], bvec[s, 2])
                    n += 1
                    if nwin == k_window:
                        # emit the front-most buffered fragment
                        alpha_e = wa[0]
                        w = alpha_e * t
                        cr += wr[0] * w
                        cg += wg[0] * w
                        cb += wb[0] * w
                        aa += w
                        dd += wd[0] * w
                        t *= (1.0 - alpha_e)
                        for j in range(nwin - 1):
                            wd[j] = wd[j + 1]
                            wa[j] = wa[j + 1]
                            wr[j] = wr[j + 1]
                            wg[j] = wg[j + 1]
                            wb[j] = wb[j + 1]
                            wi[j] = wi[j + 1]
                        nwin -= 1
                        if t < T_MIN:
                            saturated = True
                            break
                    j = nwin
                    while j > 0 and (wd[j - 1] > d or (wd[j - 1] == d and wi[j - 1] > s)):
                        wd[j] = wd[j - 1]
                        wa[j] = wa[j - 1]
                        wr[j] = wr[j - 1]
                        wg[j] = wg[j - 1]
                        wb[j] = wb[j - 1]
                        wi[j] = wi[j - 1]
                        j -= 1
                    wd[j] = d
                    wa[j] = alpha
                    wr[j] = color[s, 0]
                    wg[j] = color[s, 1]
                    wb[j] = color[s, 2]
                    wi[j] = s
                    nwin += 1
                if not saturated:
                    for j in range(nwin):
                        alpha = wa[j]
                        w = alpha * t
                        cr += wr[j] * w
                        cg += wg[j] * w
                        cb += wb[j] * w
                        aa += w
                        dd += wd[j] * w
                        t *= (1.0 - alpha)
                        if t < T_MIN:
                            break
                out_color[iy, ix, 0] = cr
                out_color[iy, ix, 1] = cg
                out_color[iy, ix, 2] = cb
                out_alpha[iy, ix] = aa
                out_depth[iy, ix] = dd
                out_count[iy, ix] = n


@njit(parallel=True, cache=True)
def blend_pyramid_groups(group_start, group_cell, frag_w, frag_op, frag_feat,
                         k_max, out_flat):
    """Front-to-back blend of depth-sorted pyramid fragments per (layer,pixel) cell.

    Fragments of each group are already sorted by (depth, point index); only
    the first k_max contribute.
    """
    d = frag_feat.shape[1]
    for g in prange(group_start.shape[0] - 1):
        lo = group_start[g]
        hi = min(group_start[g + 1], lo + k_max)
        cell = group_cell[g]
        t = 1.0
        for f in range(lo, hi):
            af = frag_op[f] * frag_w[f]
            w = af * t
            for c in range(d):
                out_flat[cell, c] += frag_feat[f, c] * w
            out_flat[cell, d] += w
            t *= (1.0 - af)
