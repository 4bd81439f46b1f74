import numpy as np
import pytest
from hypothesis import settings

import fovsplat as fs

settings.register_profile("suite", max_examples=30, deadline=None)
settings.load_profile("suite")


def make_camera(width=64, height=64, focal=None, z=0.0, yaw=0.0, **kw):
    """Camera at (0,0,z) looking down +z, optional yaw about the y axis."""
    focal = focal or 0.9 * max(width, height)
    c, s = np.cos(yaw), np.sin(yaw)
    r = np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])
    t = -r @ np.array([0.0, 0.0, z])
    return fs.CameraView(fx=focal, fy=focal, cx=width / 2, cy=height / 2,
                         width=width, height=height, r=r, t=t,
                         near=0.05, far=100.0, **kw)


def random_gaussians(rng, n, scale_range=(0.02, 0.12), z_range=(1.5, 4.0),
                     opacity_range=(0.05, 1.0), sh_bands=1):
    pos = rng.uniform([-1.0, -1.0, z_range[0]], [1.0, 1.0, z_range[1]], (n, 3))
    logs = np.log(rng.uniform(*scale_range, (n, 3)))
    rots = rng.normal(size=(n, 4))
    opac = rng.uniform(*opacity_range, n)
    sh = rng.uniform(-0.6, 0.6, (n, sh_bands, 3))
    return fs.GaussianSet.from_activated(pos, logs, rots, opac, sh)


def splat_on_ray(camera, pixel, depth, opacity, color_rgb, sigma_world=0.02):
    """An isotropic Gaussian whose mean lies exactly on the given pixel ray."""
    px, py = pixel[0] + 0.5, pixel[1] + 0.5
    x = (px - camera.cx) / camera.fx * depth
    y = (py - camera.cy) / camera.fy * depth
    pos_cam = np.array([x, y, depth])
    pos_world = camera.r.T @ (pos_cam - camera.t)
    sh = (np.asarray(color_rgb, dtype=np.float64) - 0.5) / fs.periphery.SH_C0
    return dict(position=pos_world, log_scale=np.log(sigma_world), opacity=opacity, sh=sh)


def build_set(splats):
    n = len(splats)
    pos = np.stack([s["position"] for s in splats])
    logs = np.stack([np.full(3, s["log_scale"]) for s in splats])
    rots = np.zeros((n, 4))
    rots[:, 0] = 1.0
    opac = np.array([s["opacity"] for s in splats])
    sh = np.stack([s["sh"] for s in splats])[:, None, :]
    return fs.GaussianSet.from_activated(pos, logs, rots, opac, sh)


def adversarial_two_splat():
    """Two elongated splats crossing as an X with equal primitive depth.

    Any yaw perturbation flips their mean-depth order while the per-pixel
    depth order at the overlap stays put: the global sort pops, exact
    per-pixel sorting does not.
    """
    pos = np.array([[-0.4, 0, 3.0], [0.4, 0, 3.0]])
    logs = np.log(np.array([[0.8, 0.04, 0.04]] * 2))

    def quat_z(angle):
        return np.array([np.cos(angle / 2), 0.0, 0.0, np.sin(angle / 2)])

    ang = np.arctan2(0.25, 0.8)
    rots = np.stack([quat_z(ang), quat_z(-ang)])
    opac = np.array([0.75, 0.75])
    sh = np.stack([(np.array([1.0, 0.05, 0.05]) - 0.5) / fs.periphery.SH_C0,
                   (np.array([0.05, 1.0, 0.05]) - 0.5) / fs.periphery.SH_C0])[:, None, :]
    return fs.GaussianSet.from_activated(pos, logs, rots, opac, sh)


def compensated_rotation_pair(phi=3e-5):
    """Yaw +-phi with the principal point re-anchored on the old image center,
    isolating the primitive-order flip from bulk image motion."""
    cams = []
    for sign in (-1.0, 1.0):
        cam = make_camera(256, 256, focal=256.0, yaw=sign * phi)
        cams.append(cam.replace(cx=cam.cx - cam.fx * np.tan(sign * phi)))
    return cams


@pytest.fixture(scope="session")
def room_scene():
    spec = fs.SceneSpec(kind="checkerboard_room", seed=11, n_gaussians=4000,
                        n_points=12000, n_views=1, resolution=(192, 192))
    gs, cloud, views = fs.generate_synthetic(spec)
    return gs, cloud, views[0][0], views[0][1]


@pytest.fixture(scope="session")
def warm_kernels(room_scene):
    """Compile the numba kernels once so timing-sensitive tests stay honest."""
    gs, cloud, cam, _ = room_scene
    for mode in ("global", "per_pixel_exact", "hierarchical"):
        fs.render_periphery(gs, cam, sort_mode=mode)
    sub = fs.make_subfrustum(cam, (cam.width / 2, cam.height / 2), 32)
    frame = fs.render_periphery(gs, cam)
    kept = fs.cull_points(cloud, sub, frame.depth, frame.alpha)
    fs.splat_pyramid(cloud, kept, sub)
    return True
