"""Independent reference implementations the production paths are checked against.

Everything here recomputes fragment alphas with ``math.exp`` on Python
floats and blends with the documented operation order, so comparisons
against the kernels can demand bit equality.
"""

import math

import numpy as np

from fovsplat._kernels import ALPHA_MIN, T_MIN
from fovsplat.periphery import SplatBatch


def eq1_accumulated_depth(depths, alphas):
    """Scalar brute-force evaluation of the accumulated-depth sum.

    Applies the same standard-practice cutoffs as the pixel pipeline
    (fragments below 1/255 skipped, series truncated once transmittance
    falls under 1e-4), recomputing the transmittance product from scratch
    per term.
    """
    d = 0.0
    kept = [(di, ai) for di, ai in zip(depths, alphas) if ai >= ALPHA_MIN]
    for i, (di, ai) in enumerate(kept):
        t = 1.0
        for m in range(i):
            t *= (1.0 - kept[m][1])
        if t < T_MIN:
            break
        d += di * ai * t
    return d


def frag_alpha(px, py, batch: SplatBatch, s):
    dx = px - batch.mean2d[s, 0]
    dy = py - batch.mean2d[s, 1]
    q = (batch.conic[s, 0] * dx * dx + 2.0 * batch.conic[s, 1] * dx * dy
         + batch.conic[s, 2] * dy * dy)
    return batch.opacity[s] * math.exp(-0.5 * q)


def frag_depth(px, py, batch: SplatBatch, s, cam):
    rx = (px - cam.cx) / cam.fx
    ry = (py - cam.cy) / cam.fy
    a = batch.amat[s]
    den = a[0] * rx * rx + a[3] * ry * ry + a[5] + 2.0 * (a[1] * rx * ry + a[2] * rx + a[4] * ry)
    num = batch.bvec[s, 0] * rx + batch.bvec[s, 1] * ry + batch.bvec[s, 2]
    return num / den


def blend_sorted(frags, colors):
    """Front-to-back blend of (depth, splat, alpha) triples, pre-sorted."""
    cr = cg = cb = aa = dd = 0.0
    t = 1.0
    for d, s, a in frags:
        w = a * t
        cr += colors[s, 0] * w
        cg += colors[s, 1] * w
        cb += colors[s, 2] * w
        aa += w
        dd += d * w
        t *= (1.0 - a)
        if t < T_MIN:
            break
    return (cr, cg, cb), aa, dd


def render_exact_small(batch: SplatBatch, cam):
    """Per pixel: gather every fragment of every splat, fully sort, blend.

    O(W*H*M) pure Python; only for small scenes.
    """
    h, w = cam.height, cam.width
    color = np.zeros((h, w, 3))
    alpha = np.zeros((h, w))
    depth = np.zeros((h, w))
    count = np.zeros((h, w), dtype=np.int64)
    for iy in range(h):
        py = iy + 0.5
        for ix in range(w):
            px = ix + 0.5
            frags = []
            for s in range(len(batch)):
                a = frag_alpha(px, py, batch, s)
                if a < ALPHA_MIN:
                    continue
                frags.append((frag_depth(px, py, batch, s, cam), s, a))
            frags.sort(key=lambda f: (f[0], f[1]))
            rgb, aa, dd = blend_sorted(frags, batch.color)
            color[iy, ix] = rgb
            alpha[iy, ix] = aa
            depth[iy, ix] = dd
            count[iy, ix] = len(frags)
    return color, alpha, depth, count


def render_exact_prefiltered(batch: SplatBatch, cam):
    """Same contract as render_exact_small with a conservative numpy prescan.

    Candidate (pixel, splat) pairs come from a vectorized alpha bound with a
    generous margin for numpy/libm exp ulp differences; alphas and depths are
    then recomputed exactly like the kernel before the cutoff is applied.
    """
    h, w = cam.height, cam.width
    cand_pix: list[np.ndarray] = []
    cand_splat: list[np.ndarray] = []
    for s in range(len(batch)):
        r = batch.radius_bin[s]
        mx, my = batch.mean2d[s]
        x0 = max(0, int(math.floor(mx - r - 0.5)))
        x1 = min(w - 1, int(math.floor(mx + r - 0.5)) + 1)
        y0 = max(0, int(math.floor(my - r - 0.5)))
        y1 = min(h - 1, int(math.floor(my + r - 0.5)) + 1)
        if x0 > x1 or y0 > y1:
            continue
        xs = np.arange(x0, x1 + 1) + 0.5
        ys = np.arange(y0, y1 + 1) + 0.5
        dx = (xs - mx)[None, :]
        dy = (ys - my)[:, None]
        q = (batch.conic[s, 0] * dx * dx + 2.0 * batch.conic[s, 1] * dx * dy
             + batch.conic[s, 2] * dy * dy)
        a_np = batch.opacity[s] * np.exp(-0.5 * q)
        yy, xx = np.nonzero(a_np >= ALPHA_MIN * (1.0 - 1e-9))
        if yy.size:
            cand_pix.append((yy + y0).astype(np.int64) * w + (xx + x0))
            cand_splat.append(np.full(yy.size, s, dtype=np.int64))
    color = np.zeros((h, w, 3))
    alpha = np.zeros((h, w))
    depth = np.zeros((h, w))
    count = np.zeros((h, w), dtype=np.int64)
    if not cand_pix:
        return color, alpha, depth, count
    pix = np.concatenate(cand_pix)
    spl = np.concatenate(cand_splat)
    keep_d = np.empty(pix.size)
    keep_a = np.empty(pix.size)
    keep = np.zeros(pix.size, dtype=bool)
    for i in range(pix.size):
        p = pix[i]
        px = (p % w) + 0.5
        py = (p // w) + 0.5
        a = frag_alpha(px, py, batch, spl[i])
        if a < ALPHA_MIN:
            continue
        keep[i] = True
        keep_a[i] = a
        keep_d[i] = frag_depth(px, py, batch, spl[i], cam)
    pix, spl = pix[keep], spl[keep]
    fa, fd = keep_a[keep], keep_d[keep]
    order = np.lexsort((spl, fd, pix))
    pix, spl, fa, fd = pix[order], spl[order], fa[order], fd[order]
    starts = np.concatenate([[0], np.nonzero(np.diff(pix))[0] + 1, [pix.size]])
    for gi in range(starts.size - 1):
        lo, hi = starts[gi], starts[gi + 1]
        p = pix[lo]
        frags = [(fd[k], spl[k], fa[k]) for k in range(lo, hi)]
        rgb, aa, dd = blend_sorted(frags, batch.color)
        iy, ix = divmod(int(p), w)
        color[iy, ix] = rgb
        alpha[iy, ix] = aa
        depth[iy, ix] = dd
        count[iy, ix] = hi - lo
    return color, alpha, depth, count


def pyramid_two_pass(cloud, indices, sub, n_layers, k_max):
    """Naive per-layer two-pass pyramid oracle: count, sort, blend."""
    d = cloud.feature_dim
    cam = sub.camera
    sel = np.asarray(indices, dtype=np.int64)
    uv, z = cam.project(cloud.positions[sel])
    good = z > cam.near
    sel, uv, z = sel[good], uv[good], z[good]
    layer_sizes = [-(-sub.size // (1 << l)) for l in range(n_layers)]
    layers = []
    counts = []
    for l in range(n_layers):
        ls = layer_sizes[l]
        buckets: dict[tuple[int, int], list] = {}
        n_frag = 0
        for k in range(sel.size):
            s_px = cloud.sizes[sel[k]] * cam.fx / z[k]
            l_real = min(max(math.log2(max(s_px, 1.0)), 0.0), float(n_layers - 1))
            l_lo = math.floor(l_real)
            frac = l_real - l_lo
            l_hi = min(l_lo + 1, n_layers - 1)
            if l == l_lo:
                w_layer = 1.0 - frac
            elif l == l_hi and l_hi != l_lo:
                w_layer = frac
            else:
                continue
            if w_layer <= 0.0:
                continue
            scale = float(1 << l)
            clx = ((uv[k, 0] - 0.5) + 0.5) / scale - 0.5
            cly = ((uv[k, 1] - 0.5) + 0.5) / scale - 0.5
            x0 = math.floor(clx)
            y0 = math.floor(cly)
            wx = clx - x0
            wy = cly - y0
            for dx_, dy_ in ((0, 0), (1, 0), (0, 1), (1, 1)):
                tx = int(x0) + dx_
                ty = int(y0) + dy_
                w_b = (wx if dx_ else 1.0 - wx) * (wy if dy_ else 1.0 - wy)
                if not (0 <= tx < ls and 0 <= ty < ls and w_b > 0):
                    continue
                w_frag = w_layer * w_b
                buckets.setdefault((ty, tx), []).append(
                    (z[k], int(sel[k]), w_frag))
                n_frag += 1
        img = np.zeros((ls, ls, d + 1))
        for (ty, tx), frags in buckets.items():
            frags.sort(key=lambda f: (f[0], f[1]))
            t = 1.0
            for fz, pid, w_frag in frags[:k_max]:
                af = cloud.opacities[pid] * w_frag
                wgt = af * t
                for c in range(d):
                    img[ty, tx, c] += cloud.features[pid][c] * wgt
                img[ty, tx, d] += wgt
                t *= (1.0 - af)
        layers.append(img)
        counts.append(n_frag)
    return layers, counts


def bypass_scalar(pyramid, crop):
    """Per-pixel scalar reimplementation of the bypass resolver."""
    from fovsplat.resolver import upsample_bilinear
    d = pyramid.feature_dim
    acc_rgb = None
    acc_a = None
    for l in range(pyramid.n_layers - 1, -1, -1):
        lay = pyramid.layers[l]
        h, w = lay.shape[:2]
        rgb = np.zeros((h, w, 3))
        a = np.zeros((h, w))
        for y in range(h):
            for x in range(w):
                av = lay[y, x, d]
                a[y, x] = av
                for c in range(3):
                    rgb[y, x, c] = lay[y, x, c] / max(av, 1e-12)
        if acc_rgb is None:
            acc_rgb, acc_a = rgb, a
        else:
            up_rgb = upsample_bilinear(acc_rgb.transpose(2, 0, 1), h, w).transpose(1, 2, 0)
            up_a = upsample_bilinear(acc_a, h, w)
            nrgb = np.zeros_like(rgb)
            na = np.zeros_like(a)
            for y in range(h):
                for x in range(w):
                    na[y, x] = a[y, x] + up_a[y, x] * (1 - a[y, x])
                    for c in range(3):
                        nrgb[y, x, c] = rgb[y, x, c] * a[y, x] + up_rgb[y, x, c] * (1 - a[y, x])
            acc_rgb, acc_a = nrgb, na
    out = np.zeros_like(acc_rgb)
    for y in range(out.shape[0]):
        for x in range(out.shape[1]):
            for c in range(3):
                out[y, x, c] = acc_rgb[y, x, c] * acc_a[y, x] + crop[y, x, c] * (1 - acc_a[y, x])
    return out
