"""Binary little-endian PLY ingestion for Gaussian sets and neural point clouds.

Gaussian files follow the 3DGS layout: per-vertex float32 fields
``x,y,z, f_dc_0..2, f_rest_0..{3*(K-1)-1} (optional), opacity, scale_0..2,
rot_0..3``. Opacity is stored pre-activation; sigmoid is applied on load.
Point files carry ``x,y,z, size, opacity, feat_0..feat_{D-1}``.
"""

from __future__ import annotations

import numpy as np

from .scene import GaussianSet, NeuralPointCloud


class PlyParseError(ValueError):
    """Malformed header or missing field."""


class PlyDataError(ValueError):
    """Non-finite or invariant-violating record payload."""


_SH_REST = {0: 0, 9: 1, 24: 2, 45: 3}  # f_rest count -> sh degree


def _read_header(f):
    line = f.readline().decode("ascii", "replace").strip()
    if line != "ply":
        raise PlyParseError("not a PLY file (missing 'ply' magic)")
    fmt = None
    count = None
    props: list[str] = []
    in_vertex = False
    while True:
        raw = f.readline()
        if not raw:
            raise PlyParseError("unterminated header (missing 'end_header')")
        line = raw.decode("ascii", "replace").strip()
        if line.startswith("comment") or not line:
            continue
        if line.startswith("format"):
            fmt = line.split()[1]
        elif line.startswith("element"):
            _, name, n = line.split()
            in_vertex = name == "vertex"
            if in_vertex:
                count = int(n)
        elif line.startswith("property") and in_vertex:
            parts = line.split()
            if parts[1] != "float":
                raise PlyParseError(f"unsupported property type {parts[1]!r} for {parts[2]!r}")
            props.append(parts[2])
        elif line == "end_header":
            break
    if fmt != "binary_little_endian":
        raise PlyParseError(f"unsupported format {fmt!r}, expected binary_little_endian")
    if count is None:
        raise PlyParseError("missing vertex element")
    return count, props


def _read_table(path, required_prefixes):
    with open(path, "rb") as f:
        count, props = _read_header(f)
        payload = f.read(4 * len(props) * count)
    if len(payload) != 4 * len(props) * count:
        raise PlyParseError("truncated payload")
    for name in required_prefixes:
        if name not in props:
            raise PlyParseError(f"missing required field {name!r}")
    data = np.frombuffer(payload, dtype="<f4").reshape(count, len(props)).astype(np.float64)
    return {name: data[:, i] for i, name in enumerate(props)}, count


def _cols(table, names, what):
    bad = [n for n in names if n not in table]
    if bad:
        raise PlyParseError(f"missing required field {bad[0]!r}")
    arr = np.stack([table[n] for n in names], axis=1)
    finite = np.isfinite(arr).all(axis=1)
    if not finite.all():
        idx = int(np.nonzero(~finite)[0][0])
        raise PlyDataError(f"non-finite {what} at record {idx}")
    return arr


def load_gaussians(path) -> GaussianSet:
    """Load a 3DGS-layout PLY; applies sigmoid to opacity, normalizes rotations."""
    table, count = _read_table(path, ["x", "y", "z", "opacity"])
    pos = _cols(table, ["x", "y", "z"], "position")
    n_rest = sum(1 for k in table if k.startswith("f_rest_"))
    if n_rest not in _SH_REST:
        raise PlyParseError(f"unsupported f_rest field count {n_rest}")
    dc = _cols(table, [f"f_dc_{i}" for i in range(3)], "sh dc")
    sh = np.zeros((count, 1 + n_rest // 3, 3))
    sh[:, 0, :] = dc
    if n_rest:
        rest = _cols(table, [f"f_rest_{i}" for i in range(n_rest)], "sh rest")
        sh[:, 1:, :] = rest.reshape(count, 3, n_rest // 3).transpose(0, 2, 1)
    opac = _cols(table, ["opacity"], "opacity")[:, 0]
    scales = _cols(table, [f"scale_{i}" for i in range(3)], "scale")
    rots = _cols(table, [f"rot_{i}" for i in range(4)], "rotation")
    norms = np.linalg.norm(rots, axis=1)
    if np.any(norms == 0):
        idx = int(np.nonzero(norms == 0)[0][0])
        raise PlyDataError(f"zero-norm rotation at record {idx}")
    return GaussianSet(pos, scales, rots, opac, sh)


def load_points(path) -> NeuralPointCloud:
    """Load a neural-point PLY with baked sizes, opacities, and descriptors."""
    table, count = _read_table(path, ["x", "y", "z", "size", "opacity"])
    pos = _cols(table, ["x", "y", "z"], "position")
    size = _cols(table, ["size"], "size")[:, 0]
    if np.any(size <= 0):
        idx = int(np.nonzero(size <= 0)[0][0])
        raise PlyDataError(f"non-positive size at record {idx}")
    opac = _cols(table, ["opacity"], "opacity")[:, 0]
    d = sum(1 for k in table if k.startswith("feat_"))
    if d == 0:
        raise PlyParseError("missing required field 'feat_0'")
    feats = _cols(table, [f"feat_{i}" for i in range(d)], "features")
    return NeuralPointCloud(pos, size, feats, opac)


def _write_table(path, columns: dict[str, np.ndarray]):
    names = list(columns)
    count = len(next(iter(columns.values())))
    header = ["ply", "format binary_little_endian 1.0", f"element vertex {count}"]
    header += [f"property float {n}" for n in names]
    header += ["end_header"]
    data = np.stack([np.asarray(columns[n], dtype="<f4") for n in names], axis=1)
    with open(path, "wb") as f:
        f.write(("\n".join(header) + "\n").encode("ascii"))
        f.write(data.astype("<f4").tobytes())


def write_gaussians(path, gs: GaussianSet) -> None:
    """Write the 3DGS layout; raw (pre-sigmoid, unnormalized) values go to disk."""
    cols: dict[str, np.ndarray] = {
        "x": gs.positions[:, 0], "y": gs.positions[:, 1], "z": gs.positions[:, 2],
    }
    for i in range(3):
        cols[f"f_dc_{i}"] = gs.sh[:, 0, i]
    k = gs.sh.shape[1]
    if k > 1:
        rest = gs.sh[:, 1:, :].transpose(0, 2, 1).reshape(len(gs), -1)
        for i in range(rest.shape[1]):
            cols[f"f_rest_{i}"] = rest[:, i]
    cols["opacity"] = gs.opacities_raw
    for i in range(3):
        cols[f"scale_{i}"] = gs.log_scales[:, i]
    for i in range(4):
        cols[f"rot_{i}"] = gs.rotations_raw[:, i]
    _write_table(path, cols)


def write_points(path, cloud: NeuralPointCloud) -> None:
    cols: dict[str, np.ndarray] = {
        "x": cloud.positions[:, 0], "y": cloud.positions[:, 1], "z": cloud.positions[:, 2],
        "size": cloud.sizes, "opacity": cloud.opacities,
    }
    for i in range(cloud.feature_dim):
        cols[f"feat_{i}"] = cloud.features[:, i]
    _write_table(path, cols)
