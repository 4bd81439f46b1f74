"""Convolutional resolver: feature pyramid + injected peripheral crop -> foveal RGB.

Decoder-only pass from the coarsest pyramid layer to the finest. The level-0
(largest resolution) filter count is half of level 1, which keeps the most
expensive convolutions cheap. Weights live in a binary "FVSPW1" file with an
FNV-1a checksum; training happens elsewhere, so the shipped identity weights
realize the skip path: zero pyramid in, peripheral crop out, unchanged.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .fovea import FramePyramid

MAGIC = b"FVSPW1"
DEFAULT_FILTERS = (8, 16, 32, 32)  # finest -> coarsest

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3


class WeightsFormatError(ValueError):
    """Bad magic, inconsistent shapes, or truncated tensor payload."""


class WeightsChecksumError(ValueError):
    """Stored FNV-1a checksum does not match the payload."""


def fnv1a64(data: bytes) -> int:
    h = _FNV_OFFSET
    for b in data:
        h = ((h ^ b) * _FNV_PRIME) & 0xFFFFFFFFFFFFFFFF
    return h


def _tensor_specs(filters: tuple[int, ...], feature_dim: int):
    """Declared tensor order: coarsest level first, final projection last."""
    levels = len(filters)
    specs = []
    for l in range(levels - 1, -1, -1):
        in_ch = feature_dim + 1
        if l < levels - 1:
            in_ch += filters[l + 1]
        if l == 0:
            in_ch += 3
        n = filters[l]
        specs.append((f"level{l}_conv1_w", (n, in_ch, 3, 3)))
        specs.append((f"level{l}_conv1_b", (n,)))
        specs.append((f"level{l}_conv2_w", (n, n, 3, 3)))
        specs.append((f"level{l}_conv2_b", (n,)))
    specs.append(("final_w", (3, filters[0], 1, 1)))
    specs.append(("final_b", (3,)))
    return specs


@dataclass
class ResolverWeights:
    """Architecture descriptor plus flat weight tensors."""

    feature_dim: int
    filters: tuple[int, ...]           # finest level first
    tensors: dict[str, np.ndarray]
    checksum: int = field(default=0)

    def __post_init__(self):
        self.filters = tuple(int(f) for f in self.filters)
        if len(self.filters) < 2:
            raise WeightsFormatError("resolver needs at least 2 levels")
        if self.filters[0] * 2 != self.filters[1]:
            raise WeightsFormatError(
                "level-0 filter count must be half of level 1 "
                f"(got {self.filters[0]} vs {self.filters[1]})")
        for name, shape in _tensor_specs(self.filters, self.feature_dim):
            t = self.tensors.get(name)
            if t is None or tuple(t.shape) != shape:
                raise WeightsFormatError(f"tensor {name} missing or misshaped (want {shape})")

    @property
    def n_levels(self) -> int:
        return len(self.filters)


def save_weights(path, weights: ResolverWeights) -> None:
    parts = [MAGIC,
             struct.pack("<II", weights.n_levels, weights.feature_dim),
             struct.pack(f"<{weights.n_levels}I", *weights.filters)]
    for name, _ in _tensor_specs(weights.filters, weights.feature_dim):
        parts.append(np.ascontiguousarray(weights.tensors[name], dtype="<f4").tobytes())
    body = b"".join(parts)
    with open(path, "wb") as f:
        f.write(body)
        f.write(struct.pack("<Q", fnv1a64(body)))


def load_weights(path) -> ResolverWeights:
    with open(path, "rb") as f:
        blob = f.read()
    if len(blob) < len(MAGIC) + 16 or blob[:len(MAGIC)] != MAGIC:
        raise WeightsFormatError("not a FVSPW1 weights file")
    body, (stored,) = blob[:-8], struct.unpack("<Q", blob[-8:])
    if fnv1a64(body) != stored:
        raise WeightsChecksumError("weights checksum mismatch (truncated or corrupt file)")
    off = len(MAGIC)
    levels, feature_dim = struct.unpack_from("<II", body, off)
    off += 8
    filters = struct.unpack_from(f"<{levels}I", body, off)
    off += 4 * levels
    tensors = {}
    for name, shape in _tensor_specs(filters, feature_dim):
        n = int(np.prod(shape))
        try:
            arr = np.frombuffer(body, dtype="<f4", count=n, offset=off)
        except ValueError as e:
            raise WeightsFormatError(f"tensor {name} truncated") from e
        tensors[name] = arr.reshape(shape).astype(np.float64)
        off += 4 * n
    if off != len(body):
        raise WeightsFormatError("trailing bytes after declared tensors")
    w = ResolverWeights(feature_dim=feature_dim, filters=filters, tensors=tensors)
    w.checksum = stored
    return w


def identity_weights(feature_dim: int = 4, filters: tuple[int, ...] = DEFAULT_FILTERS) -> ResolverWeights:
    """Handcrafted weights whose level-0 path copies the injected crop.

    All biases are zero and the coarser levels map zero input to zero output,
    so a zero pyramid leaves only the crop passthrough.
    """
    tensors = {name: np.zeros(shape) for name, shape in _tensor_specs(filters, feature_dim)}
    crop_off = filters[1] + feature_dim + 1
    for ch in range(3):
        tensors["level0_conv1_w"][ch, crop_off + ch, 1, 1] = 1.0
        tensors["level0_conv2_w"][ch, ch, 1, 1] = 1.0
        tensors["final_w"][ch, ch, 0, 0] = 1.0
    return ResolverWeights(feature_dim=feature_dim, filters=filters, tensors=tensors)


def random_weights(feature_dim: int = 4, filters: tuple[int, ...] = DEFAULT_FILTERS,
                   seed: int = 0, scale: float = 0.05) -> ResolverWeights:
    rng = np.random.default_rng(seed)
    # float32 at creation keeps file round trips bitwise lossless
    tensors = {name: rng.normal(0.0, scale, shape).astype(np.float32).astype(np.float64)
               for name, shape in _tensor_specs(filters, feature_dim)}
    return ResolverWeights(feature_dim=feature_dim, filters=filters, tensors=tensors)


def _elu(x: np.ndarray) -> np.ndarray:
    return np.where(x > 0, x, np.expm1(np.minimum(x, 0.0)))


def conv2d_same(x: np.ndarray, w: np.ndarray, b: np.ndarray) -> np.ndarray:
    """3x3 zero-padded convolution; x is (Cin,H,W), w is (Cout,Cin,3,3)."""
    cin, h, wdt = x.shape
    cout = w.shape[0]
    xp = np.pad(x, ((0, 0), (1, 1), (1, 1)))
    win = sliding_window_view(xp, (3, 3), axis=(1, 2))  # (Cin,H,W,3,3)
    wm = w.reshape(cout, cin * 9)
    out = np.empty((cout, h, wdt))
    rows = max(1, (1 << 22) // max(1, cin * 9 * wdt))  # cap im2col buffer size
    for y0 in range(0, h, rows):
        y1 = min(y0 + rows, h)
        cols = win[:, y0:y1].transpose(1, 2, 0, 3, 4).reshape((y1 - y0) * wdt, cin * 9)
        out[:, y0:y1] = (cols @ wm.T).T.reshape(cout, y1 - y0, wdt)
    return out + b[:, None, None]


def upsample_bilinear(x: np.ndarray, h2: int, w2: int) -> np.ndarray:
    """Bilinear resample of (C,H,W) (or (H,W)) to an explicit target size."""
    squeeze = x.ndim == 2
    if squeeze:
        x = x[None]
    _, h, w = x.shape
    sy = np.clip((np.arange(h2) + 0.5) * h / h2 - 0.5, 0, h - 1)
    sx = np.clip((np.arange(w2) + 0.5) * w / w2 - 0.5, 0, w - 1)
    y0 = np.floor(sy).astype(np.int64)
    x0 = np.floor(sx).astype(np.int64)
    y1 = np.minimum(y0 + 1, h - 1)
    x1 = np.minimum(x0 + 1, w - 1)
    fy = (sy - y0)[None, :, None]
    fx = (sx - x0)[None, None, :]
    tl = x[:, y0][:, :, x0]
    tr = x[:, y0][:, :, x1]
    bl = x[:, y1][:, :, x0]
    br = x[:, y1][:, :, x1]
    out = (tl * (1 - fy) * (1 - fx) + tr * (1 - fy) * fx
           + bl * fy * (1 - fx) + br * fy * fx)
    return out[0] if squeeze else out


def resolve(pyramid: FramePyramid, periphery_crop_rgb: np.ndarray,
            weights: ResolverWeights) -> np.ndarray:
    """Decoder pass coarsest-to-finest; the crop is injected at level 0."""
    levels = weights.n_levels
    if pyramid.n_layers != levels:
        raise ValueError(f"pyramid has {pyramid.n_layers} layers, weights expect {levels}")
    if pyramid.feature_dim != weights.feature_dim:
        raise ValueError(f"feature dim mismatch: pyramid {pyramid.feature_dim}, "
                         f"weights {weights.feature_dim}")
    if pyramid.layers[0].shape[:2] != periphery_crop_rgb.shape[:2]:
        raise ValueError("crop resolution must match pyramid layer 0")
    x = None
    for l in range(levels - 1, -1, -1):
        feats = pyramid.layers[l].transpose(2, 0, 1)
        h, w = feats.shape[1:]
        parts = []
        if x is not None:
            parts.append(upsample_bilinear(x, h, w))
        parts.append(feats)
        if l == 0:
            parts.append(periphery_crop_rgb.transpose(2, 0, 1))
        inp = np.concatenate(parts, axis=0)
        x = _elu(conv2d_same(inp, weights.tensors[f"level{l}_conv1_w"],
                             weights.tensors[f"level{l}_conv1_b"]))
        x = _elu(conv2d_same(x, weights.tensors[f"level{l}_conv2_w"],
                             weights.tensors[f"level{l}_conv2_b"]))
    wf = weights.tensors["final_w"][:, :, 0, 0]
    out = np.tensordot(wf, x, axes=([1], [0])) + weights.tensors["final_b"][:, None, None]
    return out.transpose(1, 2, 0)


def bypass_resolve(pyramid: FramePyramid, periphery_crop_rgb: np.ndarray) -> np.ndarray:
    """Analytic resolver stand-in: alpha-composite point colors over the crop.

    Coarser layers are upsampled under finer ones to fill alpha holes, then
    the merged point image is mixed over the crop by its merged alpha.
    """
    d = pyramid.feature_dim
    if d < 3:
        raise ValueError("bypass resolver needs at least 3 feature channels")
    acc_rgb = None
    acc_a = None
    for l in range(pyramid.n_layers - 1, -1, -1):
        lay = pyramid.layers[l]
        a = lay[:, :, d]
        rgb = lay[:, :, 0:3] / np.maximum(a, 1e-12)[:, :, None]
        if acc_rgb is None:
            acc_rgb, acc_a = rgb, a
        else:
            h, w = a.shape
            up_rgb = upsample_bilinear(acc_rgb.transpose(2, 0, 1), h, w).transpose(1, 2, 0)
            up_a = upsample_bilinear(acc_a, h, w)
            acc_rgb = rgb * a[:, :, None] + up_rgb * (1 - a)[:, :, None]
            acc_a = a + up_a * (1 - a)
    return acc_rgb * acc_a[:, :, None] + periphery_crop_rgb * (1 - acc_a)[:, :, None]
