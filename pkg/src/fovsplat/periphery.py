"""Full-frame peripheral Gaussian rasterization with pixel-correct ordering.

Produces linear HDR color, accumulated opacity, and the transmittance-
weighted accumulated depth buffer d = sum_i d_i a_i prod_{m<i} (1 - a_m)
used downstream for point occlusion culling.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .scene import CameraView, Gaussian, GaussianSet

SORT_MODES = ("global", "per_pixel_exact", "hierarchical")

LOWPASS = 0.3            # px^2 dilation added to cov2d before rasterization
R99 = 3.0348542587702925  # sqrt(chi2_2dof at 99%): screen-cull ellipse extent
ALPHA_MIN = _kernels.ALPHA_MIN
T_MIN = _kernels.T_MIN
DET_MIN = 1e-12

SH_C0 = 0.28209479177387814
SH_C1 = 0.4886025119029199
SH_C2 = (1.0925484305920792, -1.0925484305920792, 0.31539156525252005,
         -1.0925484305920792, 0.5462742152960396)
SH_C3 = (-0.5900435899266435, 2.890611442640554, -0.4570457994644658,
         0.3731763325901154, -0.4570457994644658, 1.445305721320277,
         -0.5900435899266435)


def eval_sh(sh: np.ndarray, dirs: np.ndarray) -> np.ndarray:
    """Evaluate SH colors for coefficient stacks (N,K,3) and unit dirs (N,3)."""
    k = sh.shape[1]
    res = SH_C0 * sh[:, 0, :]
    if k > 1:
        x, y, z = dirs[:, 0:1], dirs[:, 1:2], dirs[:, 2:3]
        res = res - SH_C1 * y * sh[:, 1, :] + SH_C1 * z * sh[:, 2, :] - SH_C1 * x * sh[:, 3, :]
    if k > 4:
        xx, yy, zz = x * x, y * y, z * z
        xy, yz, xz = x * y, y * z, x * z
        res = (res
               + SH_C2[0] * xy * sh[:, 4, :]
               + SH_C2[1] * yz * sh[:, 5, :]
               + SH_C2[2] * (2.0 * zz - xx - yy) * sh[:, 6, :]
               + SH_C2[3] * xz * sh[:, 7, :]
               + SH_C2[4] * (xx - yy) * sh[:, 8, :])
    if k > 9:
        res = (res
               + SH_C3[0] * y * (3.0 * xx - yy) * sh[:, 9, :]
               + SH_C3[1] * xy * z * sh[:, 10, :]
               + SH_C3[2] * y * (4.0 * zz - xx - yy) * sh[:, 11, :]
               + SH_C3[3] * z * (2.0 * zz - 3.0 * xx - 3.0 * yy) * sh[:, 12, :]
               + SH_C3[4] * x * (4.0 * zz - xx - yy) * sh[:, 13, :]
               + SH_C3[5] * z * (xx - yy) * sh[:, 14, :]
               + SH_C3[6] * x * (xx - 3.0 * yy) * sh[:, 15, :])
    return np.maximum(res + 0.5, 0.0)


def sh_to_color(coeffs: np.ndarray, view_dir: np.ndarray) -> np.ndarray:
    """Single-primitive SH evaluation; requires a unit view direction."""
    coeffs = np.asarray(coeffs, dtype=np.float64)
    view_dir = np.asarray(view_dir, dtype=np.float64)
    if abs(np.linalg.norm(view_dir) - 1.0) > 1e-6:
        raise ValueError("view_dir must be a unit vector")
    if coeffs.shape[0] not in (1, 4, 9, 16):
        raise ValueError("coeffs must have 1, 4, 9 or 16 bands")
    return eval_sh(coeffs[None], view_dir[None])[0]


@dataclass(frozen=True)
class Splat2D:
    """A projected Gaussian: screen mean, 2D covariance, primitive depth."""

    mean2d: np.ndarray
    cov2d: np.ndarray
    depth: float
    opacity: float
    color: np.ndarray


@dataclass
class SplatBatch:
    """Struct-of-arrays projection output for the rasterization kernels."""

    mean2d: np.ndarray    # (M,2)
    cov2d: np.ndarray     # (M,3) packed (a,b,c)
    conic: np.ndarray     # (M,3) packed inverse
    z: np.ndarray         # (M,) camera depth of the mean
    opacity: np.ndarray   # (M,)
    color: np.ndarray     # (M,3)
    amat: np.ndarray      # (M,6) inverse camera-space covariance
    bvec: np.ndarray      # (M,3) amat @ mean_cam
    radius_bin: np.ndarray  # (M,) binning radius covering the alpha cutoff
    orig_idx: np.ndarray  # (M,) indices into the source set

    def __len__(self) -> int:
        return self.mean2d.shape[0]


def project_gaussians(gs: GaussianSet, camera: CameraView,
                      min_opacity: float = ALPHA_MIN) -> SplatBatch:
    """EWA first-order projection of all Gaussians; culled splats dropped."""
    n = len(gs)
    pc = gs.positions @ camera.r.T + camera.t
    z = pc[:, 2]
    keep = z > camera.near
    keep &= gs.opacities >= min_opacity

    cam_center = camera.center()
    dirs = gs.positions - cam_center
    dirs = dirs / np.maximum(np.linalg.norm(dirs, axis=1, keepdims=True), 1e-12)
    colors = eval_sh(gs.sh, dirs)

    cov_w = gs.world_covariances()
    cov_cam = camera.r @ cov_w @ camera.r.T

    zs = np.where(keep, z, 1.0)
    u = camera.fx * pc[:, 0] / zs + camera.cx
    v = camera.fy * pc[:, 1] / zs + camera.cy

    # clamp the Jacobian's view-space coordinates (3DGS convention); grazing
    # off-axis splats otherwise blow up cov2d and smear across the screen
    lim_x = 1.3 * 0.5 * camera.width / camera.fx
    lim_y = 1.3 * 0.5 * camera.height / camera.fy
    tx = np.clip(pc[:, 0] / zs, -lim_x, lim_x) * zs
    ty = np.clip(pc[:, 1] / zs, -lim_y, lim_y) * zs
    j = np.zeros((n, 2, 3))
    j[:, 0, 0] = camera.fx / zs
    j[:, 0, 2] = -camera.fx * tx / (zs * zs)
    j[:, 1, 1] = camera.fy / zs
    j[:, 1, 2] = -camera.fy * ty / (zs * zs)
    cov2 = j @ cov_cam @ np.swapaxes(j, 1, 2)
    a = cov2[:, 0, 0] + LOWPASS
    b = cov2[:, 0, 1]
    c = cov2[:, 1, 1] + LOWPASS

    det = a * c - b * b
    keep &= det > DET_MIN
    mid = 0.5 * (a + c)
    lam_max = mid + np.sqrt(np.maximum(mid * mid - det, 0.0))
    r99 = R99 * np.sqrt(lam_max)
    keep &= (u + r99 > 0) & (u - r99 < camera.width)
    keep &= (v + r99 > 0) & (v - r99 < camera.height)

    idx = np.nonzero(keep)[0]
    a, b, c, det = a[idx], b[idx], c[idx], det[idx]
    conic = np.stack([c / det, -b / det, a / det], axis=1)

    # inverse camera-space covariance for per-pixel ray depth; a tiny ridge
    # keeps near-degenerate (thin) Gaussians invertible
    cc = cov_cam[idx]
    tr = np.trace(cc, axis1=1, axis2=2)
    cc = cc + (1e-12 * np.maximum(tr, 1.0))[:, None, None] * np.eye(3)
    amat_full = np.linalg.inv(cc)
    amat = np.stack([amat_full[:, 0, 0], amat_full[:, 0, 1], amat_full[:, 0, 2],
                     amat_full[:, 1, 1], amat_full[:, 1, 2], amat_full[:, 2, 2]], axis=1)
    bvec = np.einsum("nij,nj->ni", amat_full, pc[idx])

    op = gs.opacities[idx]
    lam = np.sqrt(lam_max[idx])
    radius_bin = np.sqrt(2.0 * np.maximum(np.log(np.maximum(255.0 * op, 1e-300)), 0.0)) * lam + 1.0

    return SplatBatch(
        mean2d=np.ascontiguousarray(np.stack([u[idx], v[idx]], axis=1)),
        cov2d=np.ascontiguousarray(np.stack([a, b, c], axis=1)),
        conic=np.ascontiguousarray(conic),
        z=np.ascontiguousarray(z[idx]),
        opacity=np.ascontiguousarray(op),
        color=np.ascontiguousarray(colors[idx]),
        amat=np.ascontiguousarray(amat),
        bvec=np.ascontiguousarray(bvec),
        radius_bin=np.ascontiguousarray(radius_bin),
        orig_idx=idx,
    )


def project_gaussian(g: Gaussian, camera: CameraView) -> Splat2D | None:
    """Project a single Gaussian; returns None when culled."""
    gs = GaussianSet(g.position[None], g.scale[None], g.rotation[None],
                     np.array([0.0]), g.sh[None])
    gs.opacities = np.array([g.opacity])  # keep the caller's activated value
    batch = project_gaussians(gs, camera, min_opacity=0.0)
    if len(batch) == 0:
        return None
    a, b, c = batch.cov2d[0]
    return Splat2D(
        mean2d=batch.mean2d[0],
        cov2d=np.array([[a, b], [b, c]]),
        depth=float(batch.z[0]),
        opacity=float(batch.opacity[0]),
        color=batch.color[0],
    )


@dataclass
class PeripheryFrame:
    """Rasterization output: linear HDR color, alpha, accumulated depth."""

    color: np.ndarray   # (H,W,3)
    alpha: np.ndarray   # (H,W)
    depth: np.ndarray   # (H,W), 0 where alpha == 0
    counts: np.ndarray | None = None  # (H,W) per-pixel fragment counts

    @property
    def resolution(self) -> tuple[int, int]:
        return (self.color.shape[1], self.color.shape[0])


def bin_tiles(batch: SplatBatch, width: int, height: int):
    """CSR tile lists: per tile, splat ids whose alpha-cutoff bbox overlaps it."""
    ts = _kernels.TILE
    ntx = (width + ts - 1) // ts
    nty = (height + ts - 1) // ts
    m = len(batch)
    if m == 0:
        return np.zeros(ntx * nty + 1, dtype=np.int64), np.zeros(0, dtype=np.int64), ntx, nty
    mx, my = batch.mean2d[:, 0], batch.mean2d[:, 1]
    r = batch.radius_bin
    # pixel centers live at index + 0.5
    x0 = np.clip(np.floor((mx - r - 0.5) / ts).astype(np.int64), 0, ntx - 1)
    x1 = np.clip(np.floor((mx + r - 0.5) / ts).astype(np.int64), 0, ntx - 1)
    y0 = np.clip(np.floor((my - r - 0.5) / ts).astype(np.int64), 0, nty - 1)
    y1 = np.clip(np.floor((my + r - 0.5) / ts).astype(np.int64), 0, nty - 1)
    nx = x1 - x0 + 1
    ny = y1 - y0 + 1
    cnt = nx * ny
    total = int(cnt.sum())
    sid = np.repeat(np.arange(m, dtype=np.int64), cnt)
    local = np.arange(total, dtype=np.int64) - np.repeat(np.cumsum(cnt) - cnt, cnt)
    nx_r = np.repeat(nx, cnt)
    tx = np.repeat(x0, cnt) + local % nx_r
    ty = np.repeat(y0, cnt) + local // nx_r
    tile_id = ty * ntx + tx
    return tile_id, sid, ntx, nty


def _tile_csr(tile_id, items, n_tiles):
    counts = np.bincount(tile_id, minlength=n_tiles)
    off = np.zeros(n_tiles + 1, dtype=np.int64)
    np.cumsum(counts, out=off[1:])
    return off, items


def render_periphery(gs: GaussianSet, camera: CameraView,
                     sort_mode: str = "hierarchical", k_window: int = 16,
                     batch: SplatBatch | None = None) -> PeripheryFrame:
    """Rasterize the Gaussian set with the requested blend-ordering mode.

    ``global`` sorts primitives once by mean depth (3DGS style) and uses that
    depth in the accumulated-depth sum; ``per_pixel_exact`` fully sorts each
    pixel's fragments by per-ray depth; ``hierarchical`` streams tile-sorted
    fragments through a per-pixel K-window resort and matches the exact mode
    wherever per-pixel fragment counts fit the window.
    """
    if sort_mode not in SORT_MODES:
        raise ValueError(f"sort_mode must be one of {SORT_MODES}")
    w, h = camera.width, camera.height
    color = np.zeros((h, w, 3))
    alpha = np.zeros((h, w))
    depth = np.zeros((h, w))
    count = np.zeros((h, w), dtype=np.int32)
    if batch is None:
        batch = project_gaussians(gs, camera)
    if len(batch) == 0:
        return PeripheryFrame(color, alpha, depth, count)

    tile_id, sid, ntx, nty = bin_tiles(batch, w, h)
    if sort_mode == "per_pixel_exact":
        order = np.argsort(tile_id, kind="stable")
    else:
        # tile-major, then primitive depth with index tie-break
        rank = np.empty(len(batch), dtype=np.int64)
        rank[np.lexsort((batch.orig_idx, batch.z))] = np.arange(len(batch))
        order = np.lexsort((rank[sid], tile_id))
    tile_sorted = tile_id[order]
    items = sid[order]
    off, items = _tile_csr(tile_sorted, items, ntx * nty)

    if sort_mode == "global":
        _kernels.rasterize_global(batch.mean2d, batch.conic, batch.z, batch.opacity,
                                  batch.color, off, items, w, h,
                                  color, alpha, depth, count)
    elif sort_mode == "per_pixel_exact":
        _kernels.rasterize_exact(batch.mean2d, batch.conic, batch.opacity, batch.color,
                                 batch.amat, batch.bvec, off, items,
                                 camera.fx, camera.fy, camera.cx, camera.cy, w, h,
                                 color, alpha, depth, count)
    else:
        _kernels.rasterize_hier(batch.mean2d, batch.conic, batch.opacity, batch.color,
                                batch.amat, batch.bvec, off, items,
                                camera.fx, camera.fy, camera.cx, camera.cy, w, h, k_window,
                                color, alpha, depth, count)
    return PeripheryFrame(color, alpha, depth, count)


def popping_score(gs: GaussianSet, camera_a: CameraView, camera_b: CameraView,
                  sort_mode: str = "global") -> float:
    """Mean absolute color difference between renders from two nearby cameras."""
    fa = render_periphery(gs, camera_a, sort_mode=sort_mode)
    fb = render_periphery(gs, camera_b, sort_mode=sort_mode)
    return float(np.mean(np.abs(fa.color - fb.color)))
