"""Command-line front end: synth, render, bench, compare, prune, serve."""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import metrics, plyio
from .bench import bench_sweep
from .gaze import load_trace
from .pipeline import PipelineOptions, render_frame
from .resolver import load_weights
from .scene import SceneSpec, prune_by_opacity
from .sceneio import load_scene, save_png, write_scene


def _add_render_opts(p: argparse.ArgumentParser) -> None:
    p.add_argument("--sort-mode", default="hierarchical",
                   choices=("global", "per_pixel_exact", "hierarchical"))
    p.add_argument("--resolver", default="bypass", choices=("bypass", "weights"))
    p.add_argument("--weights", default=None, help="resolver weights file (FVSPW1)")
    p.add_argument("--fovea-px", type=int, default=64, help="fovea radius d_f in pixels")
    p.add_argument("--m", type=float, default=0.75, help="blend-start fraction")
    p.add_argument("--gamma-edge", type=float, default=0.2, help="edge-term weight")
    p.add_argument("--no-depth-cull", action="store_true")
    p.add_argument("--no-edge-term", action="store_true")
    p.add_argument("--no-popping-fix", action="store_true")


def _options(args) -> PipelineOptions:
    weights = load_weights(args.weights) if args.weights else None
    return PipelineOptions(sort_mode=args.sort_mode, resolver=args.resolver,
                           weights=weights, d_f=args.fovea_px, m=args.m,
                           gamma_edge=args.gamma_edge,
                           no_depth_cull=args.no_depth_cull,
                           no_edge_term=args.no_edge_term,
                           no_popping_fix=args.no_popping_fix)


def cmd_synth(args) -> int:
    spec = SceneSpec.from_file(args.spec) if args.spec else SceneSpec()
    if args.seed is not None:
        spec.seed = args.seed
    bundle = write_scene(args.out, spec)
    print(f"wrote scene '{spec.kind}' with {len(bundle.gaussians)} gaussians, "
          f"{len(bundle.points)} points, {len(bundle.cameras)} views to {args.out}")
    return 0


def cmd_render(args) -> int:
    bundle = load_scene(args.scene)
    opts = _options(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    trace = load_trace(args.gaze_trace) if args.gaze_trace else None
    rows = []
    for i, cam in enumerate(bundle.cameras):
        default = (cam.width / 2, cam.height / 2)
        gaze = trace.for_frame(i, default=default) if trace else default
        res = render_frame(bundle.gaussians, bundle.points, cam, gaze, opts)
        save_png(out / f"frame_{i:03d}.png", res.ldr)
        if args.float_dump:
            np.save(out / f"frame_{i:03d}.npy", res.image)
        if i < len(bundle.references):
            gt = np.clip(bundle.references[i], 0, 1)
            reg = None
            if res.subfrustum is not None and res.foveal is not None:
                reg = metrics.regularizer_r(np.clip(res.foveal, 0, 1), gt,
                                            res.subfrustum.origin, gaze, opts.d_f)
            rows.append(metrics.metrics_row(i, res.ldr, gt, reg))
    if rows:
        with open(out / "metrics.csv", "w", newline="") as f:
            w = csv.DictWriter(f, fieldnames=list(rows[0]))
            w.writeheader()
            w.writerows(rows)
    print(f"rendered {len(bundle.cameras)} frames to {out}")
    return 0


def cmd_bench(args) -> int:
    spec = SceneSpec.from_file(args.scene_spec) if args.scene_spec else SceneSpec(
        kind="textured_quads", n_gaussians=50000, n_points=20000, resolution=(512, 512))
    if args.seed is not None:
        spec.seed = args.seed
    counts = [int(x) for x in args.gaussian_counts.split(",")] if args.gaussian_counts else []
    crops = [int(x) for x in args.crop_sizes.split(",")] if args.crop_sizes else []
    opts = _options(args)
    report = bench_sweep(spec, counts, crops, warmup=args.warmup, repeats=args.repeats,
                         opts=opts)
    report.to_csv(args.out)
    for r in report.rows:
        print(f"{r.label:>16}  periphery {r.periphery_ms:8.2f} ms  "
              f"fovea {r.fovea_points_ms:7.2f} ms  resolver {r.resolver_ms:7.2f} ms  "
              f"total {r.total_ms:8.2f} ms")
    if counts:
        rho = report.spearman("n_gaussians", "periphery_ms", "gaussians_")
        print(f"spearman(count, periphery time) = {rho:.3f}")
    if crops:
        rho = report.spearman("crop_size", ("fovea_points_ms", "resolver_ms"), "crop_")
        print(f"spearman(crop, fovea+resolver time) = {rho:.3f}")
    print(f"wrote {args.out}")
    return 0


def cmd_compare(args) -> int:
    bundle = load_scene(args.scene)
    opts = _options(args)
    gts = []
    if args.gt_dir:
        for i in range(len(bundle.cameras)):
            gts.append(np.load(Path(args.gt_dir) / f"ref_{i:03d}.npy"))
    else:
        gts = bundle.references
    if len(gts) < len(bundle.cameras):
        raise SystemExit("compare requires ground-truth images for every view")
    mode_opts = {
        "full-GS": PipelineOptions(**{**opts.__dict__, "mode": "full-gs"}),
        "foveated": PipelineOptions(**{**opts.__dict__, "resolver": "weights"}),
        "bypass-foveated": PipelineOptions(**{**opts.__dict__, "resolver": "bypass"}),
    }
    rows = []
    for i, cam in enumerate(bundle.cameras):
        gaze = (cam.width / 2, cam.height / 2)
        gt = np.clip(gts[i], 0, 1)
        for name, mo in mode_opts.items():
            res = render_frame(bundle.gaussians, bundle.points, cam, gaze, mo)
            if res.subfrustum is None:
                from .fovea import make_subfrustum
                sub = make_subfrustum(cam, gaze, mo.d_f)
            else:
                sub = res.subfrustum
            row = metrics.metrics_row(i, sub.crop(res.ldr), sub.crop(gt))
            row["mode"] = name
            rows.append(row)
    with open(args.out, "w", newline="") as f:
        w = csv.DictWriter(f, fieldnames=["mode"] + [k for k in rows[0] if k != "mode"])
        w.writeheader()
        w.writerows(rows)
    for r in rows:
        print(f"view {r['view_id']} {r['mode']:>16}: psnr {r['psnr']:6.2f}  ssim {r['ssim']:.4f}")
    print(f"wrote {args.out}")
    return 0


def cmd_prune(args) -> int:
    gs = plyio.load_gaussians(args.input)
    pruned = prune_by_opacity(gs, args.threshold)
    plyio.write_gaussians(args.out, pruned)
    print(f"pruned {len(gs) - len(pruned)} of {len(gs)} gaussians "
          f"(threshold {args.threshold}) -> {args.out}")
    return 0


def cmd_serve(args) -> int:
    from .service import serve
    bundle = load_scene(args.scene)
    opts = _options(args)
    serve(bundle, host=args.host, port=args.port, opts=opts)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fovsplat",
                                description="Hybrid foveated splatting renderer")
    sub = p.add_subparsers(dest="cmd", required=True)

    sp = sub.add_parser("synth", help="generate a synthetic scene bundle")
    sp.add_argument("--spec", default=None, help="scene spec yaml")
    sp.add_argument("--seed", type=int, default=None)
    sp.add_argument("--out", required=True)
    sp.set_defaults(fn=cmd_synth)

    rp = sub.add_parser("render", help="render a camera trajectory")
    rp.add_argument("--scene", required=True)
    rp.add_argument("--out", required=True)
    rp.add_argument("--gaze-trace", default=None)
    rp.add_argument("--float-dump", action="store_true")
    rp.add_argument("--seed", type=int, default=None)
    _add_render_opts(rp)
    rp.set_defaults(fn=cmd_render)

    bp = sub.add_parser("bench", help="timing sweeps over counts and crop sizes")
    bp.add_argument("--scene-spec", default=None)
    bp.add_argument("--gaussian-counts", default="")
    bp.add_argument("--crop-sizes", default="")
    bp.add_argument("--warmup", type=int, default=2)
    bp.add_argument("--repeats", type=int, default=5)
    bp.add_argument("--seed", type=int, default=None)
    bp.add_argument("--out", required=True)
    _add_render_opts(bp)
    bp.set_defaults(fn=cmd_bench)

    cp = sub.add_parser("compare", help="foveal-crop metrics per render mode")
    cp.add_argument("--scene", required=True)
    cp.add_argument("--gt-dir", default=None)
    cp.add_argument("--out", required=True)
    _add_render_opts(cp)
    cp.set_defaults(fn=cmd_compare)

    pp = sub.add_parser("prune", help="drop low-opacity gaussians from a PLY")
    pp.add_argument("--input", required=True)
    pp.add_argument("--out", required=True)
    pp.add_argument("--threshold", type=float, default=0.005)
    pp.set_defaults(fn=cmd_prune)

    vp = sub.add_parser("serve", help="run the interactive frame service")
    vp.add_argument("--scene", required=True)
    vp.add_argument("--host", default="127.0.0.1")
    vp.add_argument("--port", type=int, default=8765)
    _add_render_opts(vp)
    vp.set_defaults(fn=cmd_serve)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
