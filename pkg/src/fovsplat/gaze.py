"""Gaze traces: simulated eye-tracker samples replayed per frame."""

from __future__ import annotations

import csv
from dataclasses import dataclass

FIELDS = ("t_ms", "eye", "u", "v", "valid")


@dataclass(frozen=True)
class GazeSample:
    t_ms: float
    eye: int
    u: float
    v: float
    valid: bool


@dataclass
class GazeTrace:
    rows: list[GazeSample]

    def __post_init__(self):
        last: dict[int, float] = {}
        for i, r in enumerate(self.rows):
            if r.eye in last and r.t_ms < last[r.eye]:
                raise ValueError(f"timestamps must be non-decreasing per eye (row {i})")
            last[r.eye] = r.t_ms

    def __len__(self) -> int:
        return len(self.rows)

    def validate_bounds(self, width: int, height: int) -> None:
        for i, r in enumerate(self.rows):
            if r.valid and not (0 <= r.u < width and 0 <= r.v < height):
                raise ValueError(f"valid gaze outside resolution at row {i}")

    def for_frame(self, frame_idx: int, eye: int = 0, default=(0.0, 0.0)):
        """Gaze for the given frame: row ``frame_idx`` of the eye's samples,
        falling back to the last valid sample, then to ``default``.

        Traces shorter than the trajectory hold their last valid gaze.
        """
        samples = [r for r in self.rows if r.eye == eye]
        gaze = None
        for r in samples[:frame_idx + 1]:
            if r.valid:
                gaze = (r.u, r.v)
        return gaze if gaze is not None else default


def load_trace(path) -> GazeTrace:
    rows = []
    with open(path, newline="") as f:
        reader = csv.DictReader(f)
        missing = [c for c in FIELDS if c not in (reader.fieldnames or [])]
        if missing:
            raise ValueError(f"gaze trace missing columns: {missing}")
        for rec in reader:
            rows.append(GazeSample(
                t_ms=float(rec["t_ms"]), eye=int(rec["eye"]),
                u=float(rec["u"]), v=float(rec["v"]),
                valid=rec["valid"].strip() in ("1", "true", "True"),
            ))
    return GazeTrace(rows)


def save_trace(path, trace: GazeTrace) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(FIELDS)
        for r in trace.rows:
            w.writerow([r.t_ms, r.eye, r.u, r.v, int(r.valid)])
