"""Image metrics and the training-loss terms used for regression testing.

The perceptual VGG term needs a pretrained network and is excluded; the
breakdown reports it as such instead of silently folding in a zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

PSNR_CAP_DB = 99.0

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03


def _check_pair(a, b):
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"resolution mismatch: {a.shape} vs {b.shape}")
    return a, b


def l1(a, b) -> float:
    a, b = _check_pair(a, b)
    return float(np.mean(np.abs(a - b)))


def psnr(a, b) -> float:
    """Peak signal-to-noise in dB for values in [0,1]; identical images cap at 99."""
    a, b = _check_pair(a, b)
    mse = float(np.mean((a - b) ** 2))
    if mse == 0.0:
        return PSNR_CAP_DB
    return min(PSNR_CAP_DB, 10.0 * math.log10(1.0 / mse))


def _ssim_window() -> np.ndarray:
    half = SSIM_WINDOW // 2
    g = np.exp(-np.arange(-half, half + 1) ** 2 / (2.0 * SSIM_SIGMA ** 2))
    g /= g.sum()
    return np.outer(g, g)


_WIN = _ssim_window()


def _filter_valid(img: np.ndarray) -> np.ndarray:
    win = sliding_window_view(img, (SSIM_WINDOW, SSIM_WINDOW))
    return np.einsum("ijkl,kl->ij", win, _WIN)


def ssim(a, b) -> float:
    """SSIM with an 11x11 Gaussian window (sigma 1.5), channels averaged."""
    a, b = _check_pair(a, b)
    if a.ndim == 2:
        a, b = a[:, :, None], b[:, :, None]
    if min(a.shape[0], a.shape[1]) < SSIM_WINDOW:
        raise ValueError(f"images must be at least {SSIM_WINDOW} px per side")
    c1 = SSIM_K1 ** 2
    c2 = SSIM_K2 ** 2
    vals = []
    for ch in range(a.shape[2]):
        x, y = a[:, :, ch], b[:, :, ch]
        mx = _filter_valid(x)
        my = _filter_valid(y)
        mxx = _filter_valid(x * x)
        myy = _filter_valid(y * y)
        mxy = _filter_valid(x * y)
        vx = mxx - mx * mx
        vy = myy - my * my
        cxy = mxy - mx * my
        num = (2 * mx * my + c1) * (2 * cxy + c2)
        den = (mx * mx + my * my + c1) * (vx + vy + c2)
        vals.append(np.mean(num / den))
    return float(np.mean(vals))


def dssim(a, b) -> float:
    return (1.0 - ssim(a, b)) / 2.0


def fovea_region_mask(size: int, crop_origin, gaze, d_f: float,
                      region: str = "disk") -> np.ndarray:
    """Pixels of the crop window inside the fovea (r_norm <= 1) or full square."""
    if region == "square":
        return np.ones((size, size), dtype=bool)
    ox, oy = crop_origin
    u = ox + np.arange(size, dtype=np.float64)[None, :] + 0.5
    v = oy + np.arange(size, dtype=np.float64)[:, None] + 0.5
    r = np.sqrt((u - gaze[0]) ** 2 + (v - gaze[1]) ** 2)
    return r <= d_f


def regularizer_r(f_image: np.ndarray, p_image: np.ndarray, crop_origin, gaze,
                  d_f: float, region: str = "disk") -> float:
    """|mean(F) - mean(crop(P))| over the foveal region, channels averaged."""
    size = f_image.shape[0]
    mask = fovea_region_mask(size, crop_origin, gaze, d_f, region)
    if not mask.any():
        raise ValueError("empty foveal region")
    ox, oy = int(crop_origin[0]), int(crop_origin[1])
    p_crop = p_image[oy:oy + size, ox:ox + size]
    return float(abs(np.mean(f_image[mask]) - np.mean(p_crop[mask])))


@dataclass
class LossWeights:
    """Mixing weights for the total loss."""

    lam: float = 0.2      # D-SSIM mix
    mu: float = 0.001     # perceptual weight, term excluded but reported
    beta: float = 1e-5    # regularizer weight

    def __post_init__(self):
        if not (0 <= self.lam <= 1):
            raise ValueError("lam must be in [0,1]")
        if self.mu < 0 or self.beta < 0:
            raise ValueError("mu and beta must be >= 0")


@dataclass
class LossBreakdown:
    l1: float
    dssim: float
    vgg: float
    vgg_excluded: bool
    reg: float
    total: float


def total_loss(render, gt, f_image, p_image, crop_origin, gaze, d_f,
               weights: LossWeights | None = None, region: str = "disk") -> LossBreakdown:
    """(1-lam) L1 + lam D-SSIM + mu VGG (excluded) + beta R."""
    w = weights or LossWeights()
    term_l1 = l1(render, gt)
    term_dssim = dssim(render, gt)
    term_reg = regularizer_r(f_image, p_image, crop_origin, gaze, d_f, region)
    total = (1.0 - w.lam) * term_l1 + w.lam * term_dssim + w.beta * term_reg
    return LossBreakdown(l1=term_l1, dssim=term_dssim, vgg=0.0, vgg_excluded=True,
                         reg=term_reg, total=total)


def metrics_row(view_id, a, b, reg: float | None = None) -> dict:
    """One CSV row of the standard metric set."""
    return {
        "view_id": view_id,
        "l1": l1(a, b),
        "psnr": psnr(a, b),
        "ssim": ssim(a, b),
        "dssim": dssim(a, b),
        "R": float("nan") if reg is None else reg,
    }
