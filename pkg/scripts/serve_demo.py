#!/usr/bin/env python3
"""Build a demo scene (if missing) and start the interactive frame service."""

import argparse
from pathlib import Path

from fovsplat.pipeline import PipelineOptions
from fovsplat.scene import SceneSpec
from fovsplat.sceneio import load_scene, write_scene
from fovsplat.service import serve


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--scene", default="demo_scene")
    ap.add_argument("--host", default="127.0.0.1")
    ap.add_argument("--port", type=int, default=8765)
    ap.add_argument("--fovea-px", type=int, default=64)
    args = ap.parse_args()

    scene_dir = Path(args.scene)
    if not (scene_dir / "gaussians.ply").exists():
        print(f"building demo scene in {scene_dir} ...")
        write_scene(scene_dir, SceneSpec(kind="checkerboard_room", seed=7,
                                         n_gaussians=8000, n_points=40000,
                                         n_views=1, resolution=(384, 384)))
    bundle = load_scene(scene_dir)
    serve(bundle, host=args.host, port=args.port,
          opts=PipelineOptions(d_f=args.fovea_px, resolver="bypass"))


if __name__ == "__main__":
    main()
