#!/usr/bin/env python3
"""Generate the demo scene bundle used by the bench and viewer scripts."""

import argparse
from pathlib import Path

from fovsplat.scene import SceneSpec
from fovsplat.sceneio import write_scene


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="demo_scene")
    ap.add_argument("--kind", default="checkerboard_room", choices=SceneSpec.KINDS)
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--gaussians", type=int, default=8000)
    ap.add_argument("--points", type=int, default=40000)
    ap.add_argument("--views", type=int, default=5)
    ap.add_argument("--resolution", type=int, nargs=2, default=(384, 384))
    args = ap.parse_args()
    spec = SceneSpec(kind=args.kind, seed=args.seed, n_gaussians=args.gaussians,
                     n_points=args.points, n_views=args.views,
                     resolution=tuple(args.resolution))
    bundle = write_scene(args.out, spec)
    print(f"wrote {args.out}: {len(bundle.gaussians)} gaussians, "
          f"{len(bundle.points)} points, {len(bundle.cameras)} views")
    print(f"render it:  fovsplat render --scene {args.out} --out {Path(args.out)}_frames")
    print(f"serve it:   fovsplat serve --scene {args.out} --port 8765")


if __name__ == "__main__":
    main()
