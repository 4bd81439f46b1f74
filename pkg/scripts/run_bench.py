#!/usr/bin/env python3
"""Scaling-trend benchmark: render time vs Gaussian count and vs crop size.

Desk-scale analog of the motivation measurements: splat rasterization cost
grows with the primitive count, while the foveal point+CNN cost scales with
the crop footprint instead.
"""

import argparse

from fovsplat.bench import bench_sweep
from fovsplat.pipeline import PipelineOptions
from fovsplat.scene import SceneSpec


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="bench.csv")
    ap.add_argument("--counts", default="50000,100000,200000,400000")
    ap.add_argument("--crops", default="128,256,512")
    ap.add_argument("--repeats", type=int, default=5)
    ap.add_argument("--warmup", type=int, default=2)
    ap.add_argument("--sort-mode", default="hierarchical")
    args = ap.parse_args()

    counts = [int(x) for x in args.counts.split(",") if x]
    crops = [int(x) for x in args.crops.split(",") if x]
    opts = PipelineOptions(sort_mode=args.sort_mode, resolver="weights", d_f=64)

    count_spec = SceneSpec(kind="textured_quads", seed=44, n_gaussians=max(counts),
                           n_points=10_000, n_views=1, resolution=(512, 512))
    report = bench_sweep(count_spec, gaussian_counts=counts,
                         warmup=args.warmup, repeats=args.repeats, opts=opts)
    crop_spec = SceneSpec(kind="textured_quads", seed=44, n_gaussians=100_000,
                          n_points=40_000, n_views=1, resolution=(640, 640))
    crop_report = bench_sweep(crop_spec, crop_sizes=crops,
                              warmup=args.warmup, repeats=args.repeats, opts=opts)
    report.rows.extend(crop_report.rows)
    report.to_csv(args.out)

    for r in report.rows:
        print(f"{r.label:>16}: periphery {r.periphery_ms:8.1f} ms | "
              f"fovea {r.fovea_points_ms:7.1f} ms | resolver {r.resolver_ms:7.1f} ms | "
              f"total {r.total_ms:8.1f} ms")
    if counts:
        print("spearman(count, periphery):",
              round(report.spearman("n_gaussians", "periphery_ms", "gaussians_"), 3))
    if crops:
        print("spearman(crop, fovea+resolver):",
              round(report.spearman("crop_size", ("fovea_points_ms", "resolver_ms"), "crop_"), 3))
    print("wrote", args.out)


if __name__ == "__main__":
    main()
