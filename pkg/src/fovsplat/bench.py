"""Benchmark sweeps: timing trends over primitive counts and crop sizes."""

from __future__ import annotations

import csv
import hashlib
import statistics
from dataclasses import dataclass, field, asdict

import numpy as np
from scipy import stats

from .pipeline import PipelineOptions, render_frame
from .scene import SceneSpec, generate_synthetic

STAGES = ("periphery_ms", "fovea_points_ms", "resolver_ms", "combine_ms", "tonemap_ms")


@dataclass
class BenchRow:
    label: str
    sort_mode: str
    n_gaussians: int
    crop_size: int
    periphery_ms: float = 0.0
    fovea_points_ms: float = 0.0
    resolver_ms: float = 0.0
    combine_ms: float = 0.0
    tonemap_ms: float = 0.0
    total_ms: float = 0.0
    image_sha: str = ""
    hashes_consistent: bool = True


@dataclass
class BenchReport:
    rows: list[BenchRow] = field(default_factory=list)

    def to_csv(self, path) -> None:
        cols = list(asdict(BenchRow("", "", 0, 0)).keys())
        with open(path, "w", newline="") as f:
            w = csv.DictWriter(f, fieldnames=cols)
            w.writeheader()
            for r in self.rows:
                w.writerow(asdict(r))

    def spearman(self, xs_attr: str, stage, label_prefix: str) -> float:
        """Rank correlation of a config attribute vs a stage (or stage-sum) time."""
        rows = [r for r in self.rows if r.label.startswith(label_prefix)]
        stages = [stage] if isinstance(stage, str) else list(stage)
        xs = [getattr(r, xs_attr) for r in rows]
        ys = [sum(getattr(r, s) for s in stages) for r in rows]
        rho, _ = stats.spearmanr(xs, ys)
        return float(rho)


def _measure(gs, cloud, camera, gaze, opts, warmup: int, repeats: int) -> tuple[dict, str, bool]:
    for _ in range(warmup):
        render_frame(gs, cloud, camera, gaze, opts)
    samples = []
    hashes = []
    for _ in range(max(1, repeats)):
        res = render_frame(gs, cloud, camera, gaze, opts)
        samples.append(res.timings_ms)
        hashes.append(hashlib.sha256(np.ascontiguousarray(res.image).tobytes()).hexdigest())
    med = {k: statistics.median(s[k] for s in samples) for k in samples[0]}
    med["total_ms"] = sum(med[s] for s in STAGES)
    return med, hashes[-1], len(set(hashes)) == 1


def bench_sweep(base_spec: SceneSpec,
                gaussian_counts=(), crop_sizes=(),
                warmup: int = 2, repeats: int = 5,
                opts: PipelineOptions | None = None) -> BenchReport:
    """Median stage timings per configuration.

    The Gaussian-count sweep regenerates the scene per count at fixed seed;
    the crop sweep varies the fovea diameter over a fixed scene. Warmups also
    absorb kernel JIT compilation.
    """
    opts = opts or PipelineOptions()
    report = BenchReport()
    for n in gaussian_counts:
        spec = SceneSpec(kind=base_spec.kind, seed=base_spec.seed, n_gaussians=int(n),
                         n_points=base_spec.n_points, n_views=1,
                         resolution=base_spec.resolution, feature_dim=base_spec.feature_dim)
        gs, cloud, views = generate_synthetic(spec)
        cam = views[0][0]
        gaze = (cam.width / 2, cam.height / 2)
        med, sha, consistent = _measure(gs, cloud, cam, gaze, opts, warmup, repeats)
        report.rows.append(BenchRow(
            label=f"gaussians_{n}", sort_mode=opts.effective_sort_mode(),
            n_gaussians=int(n), crop_size=2 * opts.d_f,
            **{s: med[s] for s in STAGES}, total_ms=med["total_ms"],
            image_sha=sha, hashes_consistent=consistent))
    if crop_sizes:
        spec = SceneSpec(kind=base_spec.kind, seed=base_spec.seed,
                         n_gaussians=base_spec.n_gaussians, n_points=base_spec.n_points,
                         n_views=1, resolution=base_spec.resolution,
                         feature_dim=base_spec.feature_dim)
        gs, cloud, views = generate_synthetic(spec)
        cam = views[0][0]
        gaze = (cam.width / 2, cam.height / 2)
        for size in crop_sizes:
            c_opts = PipelineOptions(**{**opts.__dict__, "d_f": int(size) // 2})
            med, sha, consistent = _measure(gs, cloud, cam, gaze, c_opts, warmup, repeats)
            report.rows.append(BenchRow(
                label=f"crop_{size}", sort_mode=c_opts.effective_sort_mode(),
                n_gaussians=len(gs), crop_size=int(size),
                **{s: med[s] for s in STAGES}, total_ms=med["total_ms"],
                image_sha=sha, hashes_consistent=consistent))
    return report
