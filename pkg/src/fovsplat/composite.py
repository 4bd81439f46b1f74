"""Peripheral/foveal combination: radial + edge blend mask, paste, tone map."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEFAULT_M = 0.75
DEFAULT_GAMMA_EDGE = 0.2

_SOBEL_X = np.array([[-1.0, 0.0, 1.0], [-2.0, 0.0, 2.0], [-1.0, 0.0, 1.0]])
_LUMA = np.array([0.299, 0.587, 0.114])


def smootherstep(x):
    """Quintic ramp 6x^5 - 15x^4 + 10x^3 on [0,1]; input clamped first."""
    x = np.clip(x, 0.0, 1.0)
    return x * x * x * (x * (6.0 * x - 15.0) + 10.0)


def radial_factor(u, v, gaze, d_f: float, m: float = DEFAULT_M):
    """Positional blend term f_p = (r_norm - m) / (1 - m).

    r_norm is the gaze distance over the fovea radius, clamped to [0,1];
    f_p is left unclamped (negative inside r_norm < m) and consumed clamped
    downstream.
    """
    if d_f <= 0:
        raise ValueError("d_f must be > 0")
    if not (0 <= m < 1):
        raise ValueError("m must be in [0,1)")
    r = np.sqrt((np.asarray(u, dtype=np.float64) - gaze[0]) ** 2
                + (np.asarray(v, dtype=np.float64) - gaze[1]) ** 2)
    r_norm = np.clip(r / d_f, 0.0, 1.0)
    return (r_norm - m) / (1.0 - m)


def edge_factor(f_image: np.ndarray) -> np.ndarray:
    """Sobel gradient magnitude of luminance, replicate-border, unnormalized.

    Factored as central differences followed by the [1,2,1] smoothing tap so
    constant images cancel exactly instead of leaving rounding residue.
    """
    luma = f_image @ _LUMA if f_image.ndim == 3 else np.asarray(f_image, dtype=np.float64)
    pad = np.pad(luma, 1, mode="edge")
    dx = pad[:, 2:] - pad[:, :-2]
    gx = dx[:-2, :] + 2.0 * dx[1:-1, :] + dx[2:, :]
    dy = pad[2:, :] - pad[:-2, :]
    gy = dy[:, :-2] + 2.0 * dy[:, 1:-1] + dy[:, 2:]
    return np.sqrt(gx * gx + gy * gy)


@dataclass
class BlendMask:
    """Per-pixel combination factor c plus its components for inspection."""

    c: np.ndarray
    f_p: np.ndarray
    f_e: np.ndarray


def blend_mask(f_p: np.ndarray, f_e: np.ndarray,
               gamma_edge: float = DEFAULT_GAMMA_EDGE) -> BlendMask:
    """c = 1 - S2(clamp(f_p + gamma * f_e, 0, 1))."""
    f_p = np.asarray(f_p, dtype=np.float64)
    f_e = np.asarray(f_e, dtype=np.float64)
    if f_p.shape != f_e.shape:
        raise ValueError(f"resolution mismatch: {f_p.shape} vs {f_e.shape}")
    c = 1.0 - smootherstep(f_p + gamma_edge * f_e)
    return BlendMask(c=c, f_p=f_p, f_e=f_e)


def radial_mask_image(size: int, crop_origin, gaze, d_f: float,
                      m: float = DEFAULT_M) -> np.ndarray:
    """f_p over a square crop window, in base-image pixel-center coordinates."""
    ox, oy = crop_origin
    u = ox + np.arange(size, dtype=np.float64)[None, :] + 0.5
    v = oy + np.arange(size, dtype=np.float64)[:, None] + 0.5
    return radial_factor(u, v, gaze, d_f, m)


def compose(p_image: np.ndarray, f_image: np.ndarray, mask: BlendMask,
            crop_origin) -> np.ndarray:
    """Paste (1-c) p + c f into the crop window; outside the crop, P passes through.

    The mix uses the endpoint-exact interpolation p + c (f - p) with an
    explicit c == 1 branch (as std::lerp), so c in {0,1} and f == p all
    reproduce their inputs bitwise.
    """
    ox, oy = int(crop_origin[0]), int(crop_origin[1])
    s = f_image.shape[0]
    if f_image.shape[:2] != mask.c.shape:
        raise ValueError("mask and foveal image resolutions differ")
    if ox < 0 or oy < 0 or oy + s > p_image.shape[0] or ox + s > p_image.shape[1]:
        raise ValueError("crop window out of bounds")
    out = p_image.copy()
    p = p_image[oy:oy + s, ox:ox + s]
    c = mask.c[:, :, None] if p.ndim == 3 else mask.c
    out[oy:oy + s, ox:ox + s] = np.where(c == 1.0, f_image, p + c * (f_image - p))
    return out


def tonemap(image: np.ndarray, exposure: float = 0.0, gamma: float = 2.2) -> np.ndarray:
    """Exposure/gamma transform from linear HDR to displayable [0,1] LDR."""
    if gamma <= 0:
        raise ValueError("gamma must be > 0")
    return np.clip(np.exp2(exposure) * image, 0.0, 1.0) ** (1.0 / gamma)


def to_uint8(image: np.ndarray) -> np.ndarray:
    """8-bit quantization for file export."""
    return np.clip(np.rint(image * 255.0), 0, 255).astype(np.uint8)
