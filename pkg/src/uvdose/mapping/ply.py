"""ASCII PLY import/export for surface clouds.

Vertex properties: x y z nx ny nz risk dose, where ``risk`` is 0 (non-hotspot)
or 1 (hotspot) and ``dose`` is in mJ/cm^2.
"""

from pathlib import Path

import numpy as np

from .surface import SurfaceCloud

_PROPS = [("x", "double"), ("y", "double"), ("z", "double"),
          ("nx", "double"), ("ny", "double"), ("nz", "double"),
          ("risk", "uchar"), ("dose", "double")]


def write_ply(path, cloud, comment=None):
    path = Path(path)
    lines = ["ply", "format ascii 1.0"]
    if comment:
        lines.append(f"comment {comment}")
    lines.append(f"element vertex {len(cloud)}")
    lines += [f"property {kind} {name}" for name, kind in _PROPS]
    lines.append("end_header")
    for p, n, r, d in zip(cloud.positions, cloud.normals, cloud.risk, cloud.dose):
        values = [repr(float(v)) for v in (*p, *n)] + [str(int(r)), repr(float(d))]
        lines.append(" ".join(values))
    path.write_text("\n".join(lines) + "\n", encoding="ascii")
    return path


def read_ply(path, label=""):
    text = Path(path).read_text(encoding="ascii").splitlines()
    if not text or text[0].strip() != "ply":
        raise ValueError(f"{path} is not a PLY file")
    names, count, body_start = [], None, None
    for i, line in enumerate(text[1:], start=1):
        parts = line.split()
        if not parts:
            continue
        if parts[0] == "format" and parts[1] != "ascii":
            raise ValueError("only ascii PLY is supported")
        if parts[0] == "element" and parts[1] == "vertex":
            count = int(parts[2])
        elif parts[0] == "property" and count is not None:
            names.append(parts[-1])
        elif parts[0] == "end_header":
            body_start = i + 1
            break
    if count is None or body_start is None:
        raise ValueError(f"{path}: malformed header")
    rows = [text[body_start + i].split() for i in range(count)]
    data = np.array(rows, dtype=float).reshape(count, len(names))
    col = {name: data[:, i] for i, name in enumerate(names)}
    positions = np.column_stack([col["x"], col["y"], col["z"]])
    if {"nx", "ny", "nz"} <= col.keys():
        normals = np.column_stack([col["nx"], col["ny"], col["nz"]])
    else:
        normals = np.tile([0.0, 0.0, 1.0], (count, 1))
    risk = col.get("risk", np.zeros(count)).astype(np.int8)
    dose = col.get("dose", np.zeros(count))
    return SurfaceCloud(positions, normals, risk, dose, label, None)
