"""Gaze-centered subfrustum, point culling, and pyramid splatting."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .scene import CameraView, FoveaConfig, NeuralPointCloud

N_LAYERS = 4
K_FRAGMENTS = 16
EPS_REL = 0.05     # relative depth slack against the accumulated-depth buffer
ALPHA_OCCL = 0.9   # only near-opaque periphery pixels may cull points


@dataclass
class Subfrustum:
    """Asymmetric off-center crop frustum around the fixation point.

    Projecting through ``camera`` equals projecting through ``base`` and
    subtracting ``origin``: the crop camera shares the base pose and focal
    lengths with a shifted principal point.
    """

    base: CameraView
    gaze_px: tuple[float, float]
    origin: tuple[int, int]
    size: int

    @property
    def camera(self) -> CameraView:
        return self.base.replace(cx=self.base.cx - self.origin[0],
                                 cy=self.base.cy - self.origin[1],
                                 width=self.size, height=self.size)

    def crop(self, image: np.ndarray) -> np.ndarray:
        ox, oy = self.origin
        return image[oy:oy + self.size, ox:ox + self.size]


def make_subfrustum(camera: CameraView, gaze_px, d_f: int) -> Subfrustum:
    """Square crop window of side 2*d_f centered at the gaze, clamped to bounds."""
    size = 2 * int(d_f)
    if size > camera.width or size > camera.height:
        raise ValueError("fovea crop exceeds the base resolution")
    gx, gy = float(gaze_px[0]), float(gaze_px[1])
    ox = min(max(int(round(gx)) - int(d_f), 0), camera.width - size)
    oy = min(max(int(round(gy)) - int(d_f), 0), camera.height - size)
    return Subfrustum(base=camera, gaze_px=(gx, gy), origin=(ox, oy), size=size)


def fovea_radius_px(cfg: FoveaConfig) -> int:
    """Fovea radius: half the next power-of-two of the raw pixel size."""
    raw = cfg.pixels_per_degree * cfg.fovea_degrees * cfg.resolution_scale
    size = 1 << max(0, math.ceil(math.log2(raw)))
    return size // 2


def cull_points(cloud: NeuralPointCloud, sub: Subfrustum,
                periphery_depth: np.ndarray, periphery_alpha: np.ndarray,
                eps_rel: float = EPS_REL, alpha_occl: float = ALPHA_OCCL,
                use_occlusion: bool = True) -> np.ndarray:
    """Indices of points inside the subfrustum and not behind opaque periphery.

    A point is discarded when the periphery is near-opaque at its pixel
    (alpha >= alpha_occl) and the point lies behind the accumulated depth by
    more than the relative slack.
    """
    cam = sub.base
    uv, z = cam.project(cloud.positions)
    ox, oy = sub.origin
    keep = (z > cam.near) & (z < cam.far)
    keep &= (uv[:, 0] >= ox) & (uv[:, 0] < ox + sub.size)
    keep &= (uv[:, 1] >= oy) & (uv[:, 1] < oy + sub.size)
    if use_occlusion:
        idx = np.nonzero(keep)[0]
        ix = np.floor(uv[idx, 0]).astype(np.int64)
        iy = np.floor(uv[idx, 1]).astype(np.int64)
        occluded = (periphery_alpha[iy, ix] >= alpha_occl) & \
                   (z[idx] > periphery_depth[iy, ix] * (1.0 + eps_rel))
        keep[idx[occluded]] = False
    return np.nonzero(keep)[0]


@dataclass
class FramePyramid:
    """Multi-resolution splat targets: D feature channels plus alpha."""

    layers: list[np.ndarray]          # layer l: (ceil(S/2^l), ceil(S/2^l), D+1)
    fragment_counts: list[int]

    @property
    def n_layers(self) -> int:
        return len(self.layers)

    @property
    def feature_dim(self) -> int:
        return self.layers[0].shape[2] - 1

    @classmethod
    def empty(cls, size: int, feature_dim: int, n_layers: int = N_LAYERS) -> "FramePyramid":
        layers = [np.zeros((-(-size // (1 << l)), -(-size // (1 << l)), feature_dim + 1))
                  for l in range(n_layers)]
        return cls(layers=layers, fragment_counts=[0] * n_layers)


def point_fragments(cloud: NeuralPointCloud, indices: np.ndarray, sub: Subfrustum,
                    n_layers: int = N_LAYERS):
    """Vectorized fragment generation for all pyramid layers in one pass.

    Every point lands bilinearly in the two layers bracketing
    log2(projected size); returns flat arrays sorted by (layer, pixel,
    depth, point index).
    """
    cam = sub.camera
    sel = np.asarray(indices, dtype=np.int64)
    uv, z = cam.project(cloud.positions[sel])
    good = z > cam.near
    sel, uv, z = sel[good], uv[good], z[good]
    s_px = cloud.sizes[sel] * cam.fx / z
    l_real = np.clip(np.log2(np.maximum(s_px, 1.0)), 0.0, float(n_layers - 1))
    l_lo = np.floor(l_real).astype(np.int64)
    frac = l_real - l_lo
    l_hi = np.minimum(l_lo + 1, n_layers - 1)

    layer_sizes = [-(-sub.size // (1 << l)) for l in range(n_layers)]
    layer_cells = np.array([s * s for s in layer_sizes], dtype=np.int64)
    layer_base = np.concatenate([[0], np.cumsum(layer_cells)])

    frags = {"cell": [], "z": [], "w": [], "op": [], "feat": [], "pid": [], "layer": []}
    # continuous pixel-center coords: crop pixel i center sits at c = i
    c0x = uv[:, 0] - 0.5
    c0y = uv[:, 1] - 0.5
    for which, (lays, wl) in enumerate((
            (l_lo, 1.0 - frac), (l_hi, frac))):
        active = wl > 0.0
        if which == 1:
            active &= l_hi != l_lo
        if not np.any(active):
            continue
        li = lays[active]
        w_layer = wl[active]
        scale = (1 << li).astype(np.float64)
        clx = (c0x[active] + 0.5) / scale - 0.5
        cly = (c0y[active] + 0.5) / scale - 0.5
        x0 = np.floor(clx)
        y0 = np.floor(cly)
        wx = clx - x0
        wy = cly - y0
        ls = np.array(layer_sizes, dtype=np.int64)[li]
        for dx_, dy_ in ((0, 0), (1, 0), (0, 1), (1, 1)):
            tx = x0.astype(np.int64) + dx_
            ty = y0.astype(np.int64) + dy_
            w_b = (wx if dx_ else 1.0 - wx) * (wy if dy_ else 1.0 - wy)
            ok = (tx >= 0) & (tx < ls) & (ty >= 0) & (ty < ls) & (w_b > 0)
            if not np.any(ok):
                continue
            w_frag = w_layer[ok] * w_b[ok]
            frags["cell"].append(layer_base[li[ok]] + ty[ok] * ls[ok] + tx[ok])
            frags["z"].append(z[active][ok])
            frags["w"].append(w_frag)
            frags["op"].append(cloud.opacities[sel[active][ok]])
            frags["feat"].append(cloud.features[sel[active][ok]])
            frags["pid"].append(sel[active][ok])
            frags["layer"].append(li[ok])

    if not frags["cell"]:
        empty = np.zeros(0)
        return (np.zeros(0, dtype=np.int64), empty, empty, empty,
                np.zeros((0, cloud.feature_dim)), np.zeros(0, dtype=np.int64),
                np.zeros(0, dtype=np.int64), layer_sizes, layer_base)
    cell = np.concatenate(frags["cell"])
    zf = np.concatenate(frags["z"])
    wf = np.concatenate(frags["w"])
    opf = np.concatenate(frags["op"])
    featf = np.vstack(frags["feat"])
    pidf = np.concatenate(frags["pid"])
    layf = np.concatenate(frags["layer"])
    order = np.lexsort((pidf, zf, cell))
    return (cell[order], zf[order], wf[order], opf[order], featf[order],
            pidf[order], layf[order], layer_sizes, layer_base)


def splat_pyramid(cloud: NeuralPointCloud, indices: np.ndarray, sub: Subfrustum,
                  n_layers: int = N_LAYERS, k_max: int = K_FRAGMENTS) -> FramePyramid:
    """Splat the selected points into the feature pyramid.

    Per (layer, pixel) cell the K front-most fragments by depth (point-index
    tie-break) are alpha-blended front to back into features plus alpha.
    """
    d = cloud.feature_dim
    cell, zf, wf, opf, featf, pidf, layf, layer_sizes, layer_base = \
        point_fragments(cloud, indices, sub, n_layers)
    flat = np.zeros((int(layer_base[-1]), d + 1))
    counts = [0] * n_layers
    if cell.size:
        group_cell, group_start_idx = np.unique(cell, return_index=True)
        group_start = np.concatenate([group_start_idx, [cell.size]]).astype(np.int64)
        _kernels.blend_pyramid_groups(group_start, group_cell,
                                      np.ascontiguousarray(wf), np.ascontiguousarray(opf),
                                      np.ascontiguousarray(featf), k_max, flat)
        binned = np.bincount(layf, minlength=n_layers)
        counts = [int(c) for c in binned[:n_layers]]
    layers = [flat[layer_base[l]:layer_base[l + 1]].reshape(layer_sizes[l], layer_sizes[l], d + 1)
              for l in range(n_layers)]
    return FramePyramid(layers=layers, fragment_counts=counts)
