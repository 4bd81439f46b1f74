"""Scene data model, synthetic scene generation, and primitive pruning."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

SH_C0 = 0.28209479177387814

# Raw (pre-sigmoid) opacities are clipped to this magnitude so that an
# activated opacity of exactly 0.0 or 1.0 survives a write/load round trip.
_LOGIT_CLIP = 40.0


def sigmoid(x):
    return 1.0 / (1.0 + np.exp(-np.asarray(x, dtype=np.float64)))


def logit(p):
    p = np.asarray(p, dtype=np.float64)
    out = np.empty_like(p)
    lo = p <= sigmoid(-_LOGIT_CLIP)
    hi = p >= sigmoid(_LOGIT_CLIP)
    mid = ~(lo | hi)
    out[lo] = -_LOGIT_CLIP
    out[hi] = _LOGIT_CLIP
    out[mid] = np.log(p[mid] / (1.0 - p[mid]))
    return out


def quat_to_rotmat(q: np.ndarray) -> np.ndarray:
    """Unit quaternions (N,4) in (w,x,y,z) order to rotation matrices (N,3,3)."""
    q = np.asarray(q, dtype=np.float64)
    w, x, y, z = q[..., 0], q[..., 1], q[..., 2], q[..., 3]
    m = np.empty(q.shape[:-1] + (3, 3), dtype=np.float64)
    m[..., 0, 0] = 1 - 2 * (y * y + z * z)
    m[..., 0, 1] = 2 * (x * y - w * z)
    m[..., 0, 2] = 2 * (x * z + w * y)
    m[..., 1, 0] = 2 * (x * y + w * z)
    m[..., 1, 1] = 1 - 2 * (x * x + z * z)
    m[..., 1, 2] = 2 * (y * z - w * x)
    m[..., 2, 0] = 2 * (x * z - w * y)
    m[..., 2, 1] = 2 * (y * z + w * x)
    m[..., 2, 2] = 1 - 2 * (x * x + y * y)
    return m


@dataclass(frozen=True)
class Gaussian:
    """A single splat primitive.

    ``scale`` is stored in log space (world units after exp), ``rotation`` is a
    unit quaternion (w,x,y,z), ``opacity`` is the activated value in [0,1] and
    ``sh`` holds per-channel spherical harmonic coefficients of shape (K,3)
    with K in {1,4,9,16}.
    """

    position: np.ndarray
    scale: np.ndarray
    rotation: np.ndarray
    opacity: float
    sh: np.ndarray

    def covariance(self) -> np.ndarray:
        """World-space 3x3 covariance R diag(exp(s))^2 R^T."""
        r = quat_to_rotmat(self.rotation[None])[0]
        s = np.exp(self.scale)
        m = r * s[None, :]
        return m @ m.T


@dataclass
class GaussianSet:
    """Struct-of-arrays Gaussian collection.

    Raw file-domain values (pre-sigmoid opacity, unnormalized quaternion) are
    kept alongside the activated ones so a write/load round trip is lossless.
    """

    positions: np.ndarray        # (N,3)
    log_scales: np.ndarray       # (N,3)
    rotations_raw: np.ndarray    # (N,4) as stored on disk
    opacities_raw: np.ndarray    # (N,) pre-sigmoid
    sh: np.ndarray               # (N,K,3)
    rotations: np.ndarray = field(init=False)  # (N,4) unit
    opacities: np.ndarray = field(init=False)  # (N,) in [0,1]

    def __post_init__(self):
        self.positions = np.ascontiguousarray(self.positions, dtype=np.float64)
        self.log_scales = np.ascontiguousarray(self.log_scales, dtype=np.float64)
        self.rotations_raw = np.ascontiguousarray(self.rotations_raw, dtype=np.float64)
        self.opacities_raw = np.ascontiguousarray(self.opacities_raw, dtype=np.float64)
        self.sh = np.ascontiguousarray(self.sh, dtype=np.float64)
        norms = np.linalg.norm(self.rotations_raw, axis=1)
        if np.any(norms == 0):
            raise ValueError("zero-norm quaternion")
        self.rotations = self.rotations_raw / norms[:, None]
        self.opacities = sigmoid(self.opacities_raw)

    @classmethod
    def from_activated(cls, positions, log_scales, rotations, opacities, sh) -> "GaussianSet":
        """Build a set from activated opacities in [0,1]."""
        return cls(positions, log_scales, rotations, logit(opacities), sh)

    def __len__(self) -> int:
        return self.positions.shape[0]

    @property
    def sh_degree(self) -> int:
        return {1: 0, 4: 1, 9: 2, 16: 3}[self.sh.shape[1]]

    def gaussian(self, i: int) -> Gaussian:
        return Gaussian(
            position=self.positions[i],
            scale=self.log_scales[i],
            rotation=self.rotations[i],
            opacity=float(self.opacities[i]),
            sh=self.sh[i],
        )

    def select(self, idx) -> "GaussianSet":
        return GaussianSet(
            self.positions[idx], self.log_scales[idx], self.rotations_raw[idx],
            self.opacities_raw[idx], self.sh[idx],
        )

    def world_covariances(self) -> np.ndarray:
        r = quat_to_rotmat(self.rotations)
        s = np.exp(self.log_scales)
        m = r * s[:, None, :]
        return m @ np.swapaxes(m, 1, 2)


@dataclass(frozen=True)
class NeuralPoint:
    position: np.ndarray
    size: float
    features: np.ndarray
    opacity: float


@dataclass
class NeuralPointCloud:
    """Foveal point cloud: contribution sizes and compressed feature descriptors."""

    positions: np.ndarray   # (M,3)
    sizes: np.ndarray       # (M,) world units, > 0
    features: np.ndarray    # (M,D)
    opacities: np.ndarray   # (M,) in [0,1]

    def __post_init__(self):
        self.positions = np.ascontiguousarray(self.positions, dtype=np.float64)
        self.sizes = np.ascontiguousarray(self.sizes, dtype=np.float64)
        self.features = np.ascontiguousarray(self.features, dtype=np.float64)
        self.opacities = np.ascontiguousarray(self.opacities, dtype=np.float64)
        if np.any(self.sizes <= 0):
            raise ValueError("point size must be > 0")
        if not np.all(np.isfinite(self.features)):
            raise ValueError("non-finite point features")

    def __len__(self) -> int:
        return self.positions.shape[0]

    @property
    def feature_dim(self) -> int:
        return self.features.shape[1]

    def point(self, i: int) -> NeuralPoint:
        return NeuralPoint(self.positions[i], float(self.sizes[i]),
                           self.features[i], float(self.opacities[i]))

    def select(self, idx) -> "NeuralPointCloud":
        return NeuralPointCloud(self.positions[idx], self.sizes[idx],
                                self.features[idx], self.opacities[idx])


@dataclass
class CameraView:
    """Pinhole camera with a rigid world-to-camera transform.

    Image coordinates: u along width, v along height, pixel (i,j) spans
    [i,i+1)x[j,j+1) with its center at (i+0.5, j+0.5). Camera space is x
    right, y down, z forward. ``exposure`` (EV) and ``gamma`` feed the tone
    mapper only.
    """

    fx: float
    fy: float
    cx: float
    cy: float
    width: int
    height: int
    r: np.ndarray            # (3,3) world-to-camera rotation
    t: np.ndarray            # (3,) translation, x_cam = R x_world + t
    near: float = 0.05
    far: float = 100.0
    exposure: float = 0.0
    gamma: float = 2.2

    def __post_init__(self):
        self.r = np.ascontiguousarray(self.r, dtype=np.float64)
        self.t = np.ascontiguousarray(self.t, dtype=np.float64)
        if not (0 < self.near < self.far):
            raise ValueError("camera requires 0 < near < far")
        if self.width <= 0 or self.height <= 0:
            raise ValueError("camera resolution must be positive")
        if self.fx <= 0 or self.fy <= 0:
            raise ValueError("focal lengths must be positive")

    @property
    def resolution(self) -> tuple[int, int]:
        return (self.width, self.height)

    def center(self) -> np.ndarray:
        """Camera origin in world space."""
        return -self.r.T @ self.t

    def to_camera(self, points: np.ndarray) -> np.ndarray:
        return points @ self.r.T + self.t

    def project(self, points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """World points (N,3) to image coords (N,2) and camera depth (N,)."""
        pc = self.to_camera(np.atleast_2d(points))
        z = pc[:, 2]
        with np.errstate(divide="ignore", invalid="ignore"):
            u = self.fx * pc[:, 0] / z + self.cx
            v = self.fy * pc[:, 1] / z + self.cy
        return np.stack([u, v], axis=1), z

    def replace(self, **kw) -> "CameraView":
        d = dict(fx=self.fx, fy=self.fy, cx=self.cx, cy=self.cy,
                 width=self.width, height=self.height, r=self.r.copy(), t=self.t.copy(),
                 near=self.near, far=self.far, exposure=self.exposure, gamma=self.gamma)
        d.update(kw)
        return CameraView(**d)


@dataclass
class FoveaConfig:
    """Fovea geometry and blend parameters."""

    d_f: int = 256                 # fovea radius, pixels
    m: float = 0.75                # blend-start fraction
    gamma_edge: float = 0.2        # edge-term weight
    pixels_per_degree: float = 15.7
    fovea_degrees: float = 17.0
    resolution_scale: float = 1.4

    def __post_init__(self):
        if self.d_f <= 0:
            raise ValueError("d_f must be > 0")
        if not (0 <= self.m < 1):
            raise ValueError("m must be in [0,1)")
        if self.gamma_edge < 0:
            raise ValueError("gamma_edge must be >= 0")


@dataclass
class SceneSpec:
    """Key-value description of a synthetic scene."""

    kind: str = "checkerboard_room"
    seed: int = 0
    n_gaussians: int = 5000
    n_points: int = 20000
    n_views: int = 3
    resolution: tuple[int, int] = (256, 256)
    feature_dim: int = 4

    KINDS = ("textured_quads", "colored_spheres", "checkerboard_room")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown scene kind {self.kind!r}; expected one of {self.KINDS}")
        self.resolution = tuple(int(x) for x in self.resolution)

    @classmethod
    def from_file(cls, path) -> "SceneSpec":
        with open(path) as f:
            raw = yaml.safe_load(f) or {}
        known = {k: raw[k] for k in
                 ("kind", "seed", "n_gaussians", "n_points", "n_views", "resolution", "feature_dim")
                 if k in raw}
        return cls(**known)

    def to_file(self, path) -> None:
        with open(path, "w") as f:
            yaml.safe_dump({
                "kind": self.kind, "seed": self.seed,
                "n_gaussians": self.n_gaussians, "n_points": self.n_points,
                "n_views": self.n_views, "resolution": list(self.resolution),
                "feature_dim": self.feature_dim,
            }, f)


def prune_by_opacity(gs: GaussianSet, threshold: float) -> GaussianSet:
    """Drop Gaussians with activated opacity below ``threshold``, keeping order."""
    if not (0.0 <= threshold <= 1.0):
        raise ValueError("threshold must be in [0,1]")
    keep = np.nonzero(gs.opacities >= threshold)[0]
    return gs.select(keep)


# --- synthetic scenes -------------------------------------------------------
#
# Scenes are built from opaque flat-colored primitives (quads and spheres).
# Gaussians and neural points are sampled on the primitive surfaces; the
# reference images come from an exact painter's-algorithm rasterizer of the
# primitives themselves, independent of both splatting paths.


@dataclass
class _Quad:
    corners: np.ndarray  # (4,3) in plane, ordered
    color: np.ndarray    # (3,)


@dataclass
class _Sphere:
    center: np.ndarray
    radius: float
    color: np.ndarray


def _checker_quads(origin, eu, ev, nu, nv, color_a, color_b):
    """Split a parallelogram patch into an nu x nv checkerboard of quads."""
    quads = []
    for i in range(nu):
        for j in range(nv):
            c0 = origin + eu * (i / nu) + ev * (j / nv)
            quads.append(_Quad(
                corners=np.stack([c0, c0 + eu / nu, c0 + eu / nu + ev / nv, c0 + ev / nv]),
                color=np.asarray(color_a if (i + j) % 2 == 0 else color_b, dtype=np.float64),
            ))
    return quads


def _room_primitives(rng):
    """Checkerboard room interior plus a central occluder panel."""
    quads = []
    # back wall z=4, floor y=+1.2, ceiling y=-1.2, side walls x=+-1.6
    quads += _checker_quads(np.array([-1.6, -1.2, 4.0]), np.array([3.2, 0, 0]), np.array([0, 2.4, 0]),
                            8, 6, (0.85, 0.85, 0.9), (0.15, 0.2, 0.35))
    quads += _checker_quads(np.array([-1.6, 1.2, 0.2]), np.array([3.2, 0, 0]), np.array([0, 0, 3.8]),
                            8, 8, (0.6, 0.5, 0.35), (0.3, 0.22, 0.15))
    quads += _checker_quads(np.array([-1.6, -1.2, 0.2]), np.array([3.2, 0, 0]), np.array([0, 0, 3.8]),
                            8, 8, (0.75, 0.75, 0.75), (0.5, 0.5, 0.55))
    quads += _checker_quads(np.array([-1.6, -1.2, 0.2]), np.array([0, 2.4, 0]), np.array([0, 0, 3.8]),
                            6, 8, (0.7, 0.3, 0.3), (0.4, 0.12, 0.12))
    quads += _checker_quads(np.array([1.6, -1.2, 0.2]), np.array([0, 2.4, 0]), np.array([0, 0, 3.8]),
                            6, 8, (0.3, 0.6, 0.3), (0.1, 0.32, 0.1))
    # occluder panel in front of the back wall
    quads += _checker_quads(np.array([-0.7, -0.55, 2.0]), np.array([1.4, 0, 0]), np.array([0, 1.1, 0]),
                            5, 4, (0.95, 0.8, 0.2), (0.8, 0.35, 0.05))
    return quads, []


def _quad_primitives(rng, n):
    quads = []
    for _ in range(max(1, n)):
        center = rng.uniform([-1.5, -1.5, 2.0], [1.5, 1.5, 5.0])
        eu = rng.normal(size=3)
        eu /= np.linalg.norm(eu)
        ev = np.cross(eu, rng.normal(size=3))
        ev /= np.linalg.norm(ev)
        su, sv = rng.uniform(0.4, 1.2, 2)
        origin = center - eu * su / 2 - ev * sv / 2
        ca, cb = rng.uniform(0.1, 1.0, 3), rng.uniform(0.1, 1.0, 3)
        quads += _checker_quads(origin, eu * su, ev * sv, 2, 2, ca, cb)
    return quads, []


def _sphere_primitives(rng, n):
    spheres = []
    for _ in range(max(1, n)):
        spheres.append(_Sphere(
            center=rng.uniform([-1.5, -1.5, 2.5], [1.5, 1.5, 5.5]),
            radius=float(rng.uniform(0.25, 0.6)),
            color=rng.uniform(0.1, 1.0, 3),
        ))
    return [], spheres


def render_reference(quads, spheres, camera: CameraView) -> np.ndarray:
    """Painter's-algorithm rasterization of opaque primitives, flat shading."""
    h, w = camera.height, camera.width
    img = np.zeros((h, w, 3), dtype=np.float64)
    prims = [("quad", q, float(np.mean(camera.to_camera(q.corners)[:, 2]))) for q in quads]
    prims += [("sphere", s, float(camera.to_camera(s.center[None])[0, 2])) for s in spheres]
    prims.sort(key=lambda p: -p[2])  # far to near
    xs = np.arange(w, dtype=np.float64) + 0.5
    ys = np.arange(h, dtype=np.float64) + 0.5
    for kind, prim, zc in prims:
        if zc <= camera.near:
            continue
        if kind == "quad":
            uv, z = camera.project(prim.corners)
            if np.any(z <= camera.near):
                continue
            x0 = max(0, int(np.floor(uv[:, 0].min())))
            x1 = min(w, int(np.ceil(uv[:, 0].max())) + 1)
            y0 = max(0, int(np.floor(uv[:, 1].min())))
            y1 = min(h, int(np.ceil(uv[:, 1].max())) + 1)
            if x0 >= x1 or y0 >= y1:
                continue
            gx, gy = np.meshgrid(xs[x0:x1], ys[y0:y1])
            inside = np.ones(gx.shape, dtype=bool)
            sign = 0.0
            for k in range(4):
                a, b = uv[k], uv[(k + 1) % 4]
                cross = (b[0] - a[0]) * (gy - a[1]) - (b[1] - a[1]) * (gx - a[0])
                if sign == 0.0:
                    sgn = np.sign(np.sum(cross))
                    sign = sgn if sgn != 0 else 1.0
                inside &= (cross * sign) >= 0
            img[y0:y1, x0:x1][inside] = prim.color
        else:
            c_cam = camera.to_camera(prim.center[None])[0]
            r_px = prim.radius * max(camera.fx, camera.fy) / c_cam[2] * 1.5
            u0 = camera.fx * c_cam[0] / c_cam[2] + camera.cx
            v0 = camera.fy * c_cam[1] / c_cam[2] + camera.cy
            x0 = max(0, int(np.floor(u0 - r_px)))
            x1 = min(w, int(np.ceil(u0 + r_px)) + 1)
            y0 = max(0, int(np.floor(v0 - r_px)))
            y1 = min(h, int(np.ceil(v0 + r_px)) + 1)
            if x0 >= x1 or y0 >= y1:
                continue
            gx, gy = np.meshgrid(xs[x0:x1], ys[y0:y1])
            # ray-sphere hit test per pixel, camera at origin
            dx = (gx - camera.cx) / camera.fx
            dy = (gy - camera.cy) / camera.fy
            dd = dx * dx + dy * dy + 1.0
            b = dx * c_cam[0] + dy * c_cam[1] + c_cam[2]
            disc = b * b - dd * (c_cam @ c_cam - prim.radius ** 2)
            hit = (disc >= 0) & (b > 0)
            img[y0:y1, x0:x1][hit] = prim.color
    return img


def _solid_angle_weights(areas, centroids, anchor):
    # density ~ area / distance^2 mirrors MVS clouds: near surfaces sample
    # densely enough that projected point spacing stays roughly uniform
    d2 = np.maximum(np.sum((centroids - anchor) ** 2, axis=1), 0.25)
    w = areas / d2
    return w / w.sum()


def _sample_on_quads(rng, quads, n, anchor):
    areas = np.array([np.linalg.norm(np.cross(q.corners[1] - q.corners[0],
                                              q.corners[3] - q.corners[0])) for q in quads])
    centroids = np.stack([q.corners.mean(axis=0) for q in quads])
    probs = _solid_angle_weights(areas, centroids, anchor)
    choice = rng.choice(len(quads), size=n, p=probs)
    uvs = rng.uniform(0, 1, (n, 2))
    pos = np.empty((n, 3))
    col = np.empty((n, 3))
    spacing = np.empty(n)
    for k, (qi, (a, b)) in enumerate(zip(choice, uvs)):
        q = quads[qi]
        eu = q.corners[1] - q.corners[0]
        ev = q.corners[3] - q.corners[0]
        pos[k] = q.corners[0] + a * eu + b * ev
        col[k] = q.color
        n_on_quad = max(1.0, n * probs[qi])
        spacing[k] = math.sqrt(areas[qi] / n_on_quad)
    return pos, col, spacing


def _sample_on_spheres(rng, spheres, n, anchor):
    areas = np.array([4 * np.pi * s.radius ** 2 for s in spheres])
    centroids = np.stack([s.center for s in spheres])
    probs = _solid_angle_weights(areas, centroids, anchor)
    choice = rng.choice(len(spheres), size=n, p=probs)
    dirs = rng.normal(size=(n, 3))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    pos = np.empty((n, 3))
    col = np.empty((n, 3))
    spacing = np.empty(n)
    for k, (si, d) in enumerate(zip(choice, dirs)):
        s = spheres[si]
        pos[k] = s.center + s.radius * d
        col[k] = s.color
        spacing[k] = math.sqrt(areas[si] / max(1.0, n * probs[si]))
    return pos, col, spacing


def _scene_cameras(spec: SceneSpec, rng) -> list[CameraView]:
    w, h = spec.resolution
    focal = 0.9 * max(w, h)
    cams = []
    for i in range(spec.n_views):
        if spec.kind == "checkerboard_room":
            # inside the room, looking roughly down +z
            t_jit = rng.uniform(-0.15, 0.15, 3) * np.array([1, 1, 0.5])
            yaw = rng.uniform(-0.08, 0.08)
            cy_, sy_ = math.cos(yaw), math.sin(yaw)
            r = np.array([[cy_, 0, -sy_], [0, 1, 0], [sy_, 0, cy_]])
            c = np.array([0.0, 0.0, 0.4]) + t_jit
        else:
            ang = 2 * np.pi * i / max(1, spec.n_views) * 0.12 + rng.uniform(-0.05, 0.05)
            ca_, sa_ = math.cos(ang), math.sin(ang)
            r = np.array([[ca_, 0, -sa_], [0, 1, 0], [sa_, 0, ca_]])
            c = np.array([math.sin(ang) * 1.0, 0.0, -0.5 + math.cos(ang) * 0.2])
        t = -r @ c
        cams.append(CameraView(fx=focal, fy=focal, cx=w / 2, cy=h / 2,
                               width=w, height=h, r=r, t=t, near=0.05, far=50.0))
    return cams


def generate_synthetic(spec: SceneSpec):
    """Deterministic synthetic scene: Gaussians, neural points, reference views.

    Returns ``(GaussianSet, NeuralPointCloud, [(CameraView, reference_image)])``
    where reference images come from the painter's-algorithm rasterizer.
    """
    if spec.n_gaussians <= 0 or spec.n_points <= 0:
        raise ValueError("empty scene requested: primitive counts must be > 0")
    rng = np.random.default_rng(spec.seed)
    if spec.kind == "checkerboard_room":
        quads, spheres = _room_primitives(rng)
        anchor = np.array([0.0, 0.0, 0.4])
    elif spec.kind == "textured_quads":
        quads, spheres = _quad_primitives(rng, max(1, spec.n_gaussians // 600))
        anchor = np.array([0.0, 0.0, -0.4])
    else:
        quads, spheres = _sphere_primitives(rng, max(1, spec.n_gaussians // 800))
        anchor = np.array([0.0, 0.0, -0.4])

    def sample(n):
        if quads and spheres:
            nq = n // 2
            pq, cq, sq = _sample_on_quads(rng, quads, nq, anchor)
            ps, cs, ss = _sample_on_spheres(rng, spheres, n - nq, anchor)
            return np.vstack([pq, ps]), np.vstack([cq, cs]), np.concatenate([sq, ss])
        if quads:
            return _sample_on_quads(rng, quads, n, anchor)
        return _sample_on_spheres(rng, spheres, n, anchor)

    gpos, gcol, gspace = sample(spec.n_gaussians)
    # overlap factor ~1.5x sample spacing keeps the surfaces hole-free
    gscale = np.log(np.clip(gspace * 1.5, 1e-4, None))
    log_scales = np.repeat(gscale[:, None], 3, axis=1)
    rot = np.zeros((spec.n_gaussians, 4))
    rot[:, 0] = 1.0
    opac = np.full(spec.n_gaussians, 0.97)
    sh = ((gcol - 0.5) / SH_C0)[:, None, :]
    # round through float32 so PLY round trips are bitwise lossless
    gs = GaussianSet(
        positions=gpos.astype(np.float32).astype(np.float64),
        log_scales=log_scales.astype(np.float32).astype(np.float64),
        rotations_raw=rot,
        opacities_raw=logit(opac).astype(np.float32).astype(np.float64),
        sh=sh.astype(np.float32).astype(np.float64),
    )

    ppos, pcol, pspace = sample(spec.n_points)
    feats = np.zeros((spec.n_points, spec.feature_dim))
    feats[:, :3] = pcol
    if spec.feature_dim > 3:
        feats[:, 3] = rng.uniform(0, 1, spec.n_points)
    cloud = NeuralPointCloud(
        positions=ppos.astype(np.float32).astype(np.float64),
        sizes=np.clip(pspace * 1.5, 1e-4, None).astype(np.float32).astype(np.float64),
        features=feats.astype(np.float32).astype(np.float64),
        opacities=np.full(spec.n_points, 0.95, dtype=np.float32).astype(np.float64),
    )

    cams = _scene_cameras(spec, rng)
    views = [(cam, render_reference(quads, spheres, cam)) for cam in cams]
    return gs, cloud, views


def scene_primitives(spec: SceneSpec):
    """Expose the opaque primitives behind a spec (for oracle-style tests)."""
    rng = np.random.default_rng(spec.seed)
    if spec.kind == "checkerboard_room":
        return _room_primitives(rng)
    if spec.kind == "textured_quads":
        return _quad_primitives(rng, max(1, spec.n_gaussians // 600))
    return _sphere_primitives(rng, max(1, spec.n_gaussians // 800))
