"""Frame orchestration: periphery -> gaze -> fovea -> resolve -> blend -> tonemap."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import composite, fovea, periphery
from .resolver import ResolverWeights, bypass_resolve, identity_weights, resolve
from .scene import CameraView, GaussianSet, NeuralPointCloud

MODES = ("foveated", "full-gs", "mask-debug")


@dataclass
class PipelineOptions:
    """Renderer configuration and ablation toggles."""

    sort_mode: str = "hierarchical"
    resolver: str = "bypass"                  # "bypass" | "weights"
    weights: ResolverWeights | None = None
    d_f: int = 64
    m: float = composite.DEFAULT_M
    gamma_edge: float = composite.DEFAULT_GAMMA_EDGE
    n_layers: int = fovea.N_LAYERS
    k_fragments: int = fovea.K_FRAGMENTS
    eps_rel: float = fovea.EPS_REL
    alpha_occl: float = fovea.ALPHA_OCCL
    no_depth_cull: bool = False
    no_edge_term: bool = False
    no_popping_fix: bool = False              # falls back to the global sort
    mode: str = "foveated"

    def effective_sort_mode(self) -> str:
        return "global" if self.no_popping_fix else self.sort_mode

    def resolver_weights(self, feature_dim: int) -> ResolverWeights:
        if self.weights is not None:
            return self.weights
        return identity_weights(feature_dim=feature_dim)


@dataclass
class FrameResult:
    image: np.ndarray                  # linear HDR composite at base resolution
    ldr: np.ndarray                    # tonemapped [0,1]
    periphery: periphery.PeripheryFrame
    foveal: np.ndarray | None
    mask: composite.BlendMask | None
    subfrustum: fovea.Subfrustum | None
    timings_ms: dict[str, float] = field(default_factory=dict)
    n_points_kept: int = 0
    n_points_in_frustum: int = 0


def render_frame(gs: GaussianSet, cloud: NeuralPointCloud | None, camera: CameraView,
                 gaze_px, opts: PipelineOptions,
                 gaze_provider=None) -> FrameResult:
    """Render one frame.

    ``gaze_provider``, when given, is called after the peripheral pass and may
    return a fresher gaze (late latching); otherwise ``gaze_px`` is used.
    """
    if opts.mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    timings: dict[str, float] = {}
    t0 = time.perf_counter()
    frame = periphery.render_periphery(gs, camera, sort_mode=opts.effective_sort_mode())
    t1 = time.perf_counter()
    timings["periphery_ms"] = (t1 - t0) * 1e3

    if gaze_provider is not None:
        latched = gaze_provider()
        if latched is not None:
            gaze_px = latched
    gaze_px = (float(np.clip(gaze_px[0], 0, camera.width - 1)),
               float(np.clip(gaze_px[1], 0, camera.height - 1)))

    if opts.mode == "full-gs" or cloud is None:
        timings["fovea_points_ms"] = 0.0
        timings["resolver_ms"] = 0.0
        timings["combine_ms"] = 0.0
        t2 = time.perf_counter()
        ldr = composite.tonemap(frame.color, camera.exposure, camera.gamma)
        timings["tonemap_ms"] = (time.perf_counter() - t2) * 1e3
        timings["total_ms"] = sum(v for k, v in timings.items() if k != "total_ms")
        return FrameResult(image=frame.color, ldr=ldr, periphery=frame, foveal=None,
                           mask=None, subfrustum=None, timings_ms=timings)

    t2 = time.perf_counter()
    sub = fovea.make_subfrustum(camera, gaze_px, opts.d_f)
    kept = fovea.cull_points(cloud, sub, frame.depth, frame.alpha,
                             eps_rel=opts.eps_rel, alpha_occl=opts.alpha_occl,
                             use_occlusion=not opts.no_depth_cull)
    in_frustum = fovea.cull_points(cloud, sub, frame.depth, frame.alpha,
                                   use_occlusion=False)
    pyramid = fovea.splat_pyramid(cloud, kept, sub,
                                  n_layers=opts.n_layers, k_max=opts.k_fragments)
    t3 = time.perf_counter()
    timings["fovea_points_ms"] = (t3 - t2) * 1e3

    crop = np.ascontiguousarray(sub.crop(frame.color))
    if opts.resolver == "weights":
        f_img = resolve(pyramid, crop, opts.resolver_weights(cloud.feature_dim))
    else:
        f_img = bypass_resolve(pyramid, crop)
    t4 = time.perf_counter()
    timings["resolver_ms"] = (t4 - t3) * 1e3

    f_p = composite.radial_mask_image(sub.size, sub.origin, gaze_px, opts.d_f, opts.m)
    if opts.no_edge_term:
        f_e = np.zeros_like(f_p)
    else:
        f_e = composite.edge_factor(np.clip(f_img, 0.0, 1.0))
    mask = composite.blend_mask(f_p, f_e, opts.gamma_edge)
    image = composite.compose(frame.color, f_img, mask, sub.origin)
    t5 = time.perf_counter()
    timings["combine_ms"] = (t5 - t4) * 1e3

    if opts.mode == "mask-debug":
        image = np.zeros_like(frame.color)
        oy, ox = sub.origin[1], sub.origin[0]
        image[oy:oy + sub.size, ox:ox + sub.size] = mask.c[:, :, None]
        ldr = image.copy()
        timings["tonemap_ms"] = 0.0
    else:
        ldr = composite.tonemap(image, camera.exposure, camera.gamma)
    t6 = time.perf_counter()
    if opts.mode != "mask-debug":
        timings["tonemap_ms"] = (t6 - t5) * 1e3
    timings["total_ms"] = sum(v for k, v in timings.items() if k != "total_ms")
    return FrameResult(image=image, ldr=ldr, periphery=frame, foveal=f_img, mask=mask,
                       subfrustum=sub, timings_ms=timings,
                       n_points_kept=int(len(kept)), n_points_in_frustum=int(len(in_frustum)))
