"""Hybrid foveated renderer: Gaussian-splat periphery + neural-point fovea.

The pipeline renders a full-frame Gaussian splat image with pixel-correct
blend ordering and an accumulated depth buffer, builds a gaze-centered
subfrustum, splats an occlusion-culled neural point cloud into a feature
pyramid, resolves the fovea with a small convolutional decoder, and blends
both images with a radial/edge mask before tone mapping.
"""

from .scene import (
    CameraView,
    FoveaConfig,
    Gaussian,
    GaussianSet,
    NeuralPoint,
    NeuralPointCloud,
    SceneSpec,
    generate_synthetic,
    prune_by_opacity,
)
from .plyio import load_gaussians, load_points, write_gaussians, write_points
from .periphery import PeripheryFrame, popping_score, project_gaussian, render_periphery, sh_to_color
from .fovea import FramePyramid, Subfrustum, cull_points, fovea_radius_px, make_subfrustum, splat_pyramid
from .resolver import ResolverWeights, bypass_resolve, identity_weights, load_weights, resolve, save_weights
from .composite import BlendMask, blend_mask, compose, edge_factor, radial_factor, smootherstep, tonemap
from .metrics import LossWeights, dssim, l1, psnr, regularizer_r, ssim, total_loss

__version__ = "0.1.0"
