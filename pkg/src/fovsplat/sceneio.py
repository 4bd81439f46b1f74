"""On-disk scene bundles: PLYs, camera list, reference views, spec file."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from . import plyio
from .composite import to_uint8
from .scene import CameraView, GaussianSet, NeuralPointCloud, SceneSpec, generate_synthetic


def camera_to_dict(cam: CameraView) -> dict:
    return {
        "fx": cam.fx, "fy": cam.fy, "cx": cam.cx, "cy": cam.cy,
        "width": cam.width, "height": cam.height,
        "r": cam.r.tolist(), "t": cam.t.tolist(),
        "near": cam.near, "far": cam.far,
        "exposure": cam.exposure, "gamma": cam.gamma,
    }


def camera_from_dict(d: dict) -> CameraView:
    return CameraView(fx=d["fx"], fy=d["fy"], cx=d["cx"], cy=d["cy"],
                      width=int(d["width"]), height=int(d["height"]),
                      r=np.array(d["r"]), t=np.array(d["t"]),
                      near=d.get("near", 0.05), far=d.get("far", 100.0),
                      exposure=d.get("exposure", 0.0), gamma=d.get("gamma", 2.2))


def save_png(path, image01: np.ndarray) -> None:
    Image.fromarray(to_uint8(image01)).save(path)


@dataclass
class SceneBundle:
    spec: SceneSpec
    gaussians: GaussianSet
    points: NeuralPointCloud
    cameras: list[CameraView]
    references: list[np.ndarray]


def write_scene(out_dir, spec: SceneSpec) -> SceneBundle:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    gs, cloud, views = generate_synthetic(spec)
    spec.to_file(out / "spec.yaml")
    plyio.write_gaussians(out / "gaussians.ply", gs)
    plyio.write_points(out / "points.ply", cloud)
    cams = [cam for cam, _ in views]
    refs = [ref for _, ref in views]
    with open(out / "cameras.json", "w") as f:
        json.dump([camera_to_dict(c) for c in cams], f, indent=1)
    for i, ref in enumerate(refs):
        np.save(out / f"ref_{i:03d}.npy", ref)
        save_png(out / f"ref_{i:03d}.png", np.clip(ref, 0, 1))
    return SceneBundle(spec=spec, gaussians=gs, points=cloud, cameras=cams, references=refs)


def load_scene(scene_dir) -> SceneBundle:
    d = Path(scene_dir)
    spec = SceneSpec.from_file(d / "spec.yaml") if (d / "spec.yaml").exists() else SceneSpec()
    gs = plyio.load_gaussians(d / "gaussians.ply")
    cloud = plyio.load_points(d / "points.ply")
    with open(d / "cameras.json") as f:
        cams = [camera_from_dict(c) for c in json.load(f)]
    refs = []
    for i in range(len(cams)):
        p = d / f"ref_{i:03d}.npy"
        if p.exists():
            refs.append(np.load(p))
    return SceneBundle(spec=spec, gaussians=gs, points=cloud, cameras=cams, references=refs)
