"""2-D occupancy grid maps and the PGM + YAML map file pair."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
import yaml
from scipy import ndimage

FREE = 0
OCCUPIED = 100
UNKNOWN = -1


@dataclass
class GridMap:
    """Occupancy cells indexed ``[row, col]``; row grows with +y, col with +x."""

    cells: np.ndarray
    resolution: float
    origin: tuple = (0.0, 0.0, 0.0)

    def __post_init__(self):
        self.cells = np.asarray(self.cells, dtype=np.int8)
        if self.cells.ndim != 2:
            raise ValueError("grid cells must be a 2-D array")
        if not self.resolution > 0:
            raise ValueError("resolution must be positive")
        self.origin = tuple(float(v) for v in self.origin)

    @classmethod
    def empty(cls, width_m, height_m, resolution=0.05, origin=(0.0, 0.0, 0.0)):
        shape = (int(round(height_m / resolution)), int(round(width_m / resolution)))
        return cls(np.zeros(shape, dtype=np.int8), resolution, origin)

    @property
    def shape(self):
        return self.cells.shape

    def in_bounds(self, cell):
        r, c = cell
        return 0 <= r < self.shape[0] and 0 <= c < self.shape[1]

    def is_free(self, cell):
        return self.in_bounds(cell) and self.cells[cell[0], cell[1]] == FREE

    def world_to_cell(self, x, y):
        return (int(np.floor((y - self.origin[1]) / self.resolution)),
                int(np.floor((x - self.origin[0]) / self.resolution)))

    def cell_center(self, cell):
        r, c = cell
        return (self.origin[0] + (c + 0.5) * self.resolution,
                self.origin[1] + (r + 0.5) * self.resolution)

    def cell_index(self, cell):
        return cell[0] * self.shape[1] + cell[1]

    def fill_box(self, lo, hi, value=OCCUPIED):
        """Mark every cell whose center lies inside the xy box [lo, hi]."""
        r0, c0 = self.world_to_cell(lo[0], lo[1])
        r1, c1 = self.world_to_cell(hi[0], hi[1])
        for r in range(max(r0, 0), min(r1, self.shape[0] - 1) + 1):
            for c in range(max(c0, 0), min(c1, self.shape[1] - 1) + 1):
                x, y = self.cell_center((r, c))
                if lo[0] <= x <= hi[0] and lo[1] <= y <= hi[1]:
                    self.cells[r, c] = value
        return self

    def inflated(self, radius):
        """Copy with occupied cells grown by ``radius`` meters (unknown stays unknown)."""
        k = int(np.ceil(radius / self.resolution))
        if k <= 0:
            return GridMap(self.cells.copy(), self.resolution, self.origin)
        yy, xx = np.mgrid[-k:k + 1, -k:k + 1]
        disk = (xx ** 2 + yy ** 2) * self.resolution ** 2 <= radius ** 2 + 1e-12
        grown = ndimage.binary_dilation(self.cells == OCCUPIED, structure=disk)
        cells = self.cells.copy()
        cells[grown] = OCCUPIED
        return GridMap(cells, self.resolution, self.origin)


def _read_pgm(path):
    data = Path(path).read_bytes()
    tokens, pos = [], 0
    while len(tokens) < 4:
        while data[pos:pos + 1].isspace():
            pos += 1
        if data[pos:pos + 1] == b"#":
            while data[pos:pos + 1] not in (b"\n", b""):
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos:pos + 1].isspace():
            pos += 1
        tokens.append(data[start:pos])
    magic, width, height, maxval = tokens[0], int(tokens[1]), int(tokens[2]), int(tokens[3])
    if magic == b"P5":
        dtype = np.uint8 if maxval < 256 else ">u2"
        pixels = np.frombuffer(data[pos + 1:], dtype=dtype, count=width * height)
    elif magic == b"P2":
        pixels = np.array(data[pos:].split()[:width * height], dtype=int)
    else:
        raise ValueError(f"{path}: unsupported PGM magic {magic!r}")
    return pixels.reshape(height, width).astype(float), maxval


def load_map(yaml_path):
    """Read a map YAML sidecar and its PGM image (map_server conventions)."""
    yaml_path = Path(yaml_path)
    meta = yaml.safe_load(yaml_path.read_text(encoding="utf-8"))
    image, maxval = _read_pgm(yaml_path.parent / meta["image"])
    occ = image / maxval if meta.get("negate", 0) else (maxval - image) / maxval
    cells = np.full(image.shape, UNKNOWN, dtype=np.int8)
    cells[occ > float(meta.get("occupied_thresh", 0.65))] = OCCUPIED
    cells[occ < float(meta.get("free_thresh", 0.196))] = FREE
    origin = tuple(meta.get("origin", (0.0, 0.0, 0.0)))
    # image row 0 is the top (largest y)
    return GridMap(cells[::-1].copy(), float(meta["resolution"]), origin)


def save_map(grid: GridMap, yaml_path, binary=True):
    yaml_path = Path(yaml_path)
    pgm_path = yaml_path.with_suffix(".pgm")
    pixels = np.full(grid.shape, 205, dtype=np.uint8)
    pixels[grid.cells == FREE] = 254
    pixels[grid.cells == OCCUPIED] = 0
    pixels = pixels[::-1]
    h, w = pixels.shape
    if binary:
        pgm_path.write_bytes(f"P5\n{w} {h}\n255\n".encode() + pixels.tobytes())
    else:
        body = "\n".join(" ".join(str(v) for v in row) for row in pixels)
        pgm_path.write_text(f"P2\n{w} {h}\n255\n{body}\n", encoding="ascii")
    meta = {"image": pgm_path.name, "resolution": grid.resolution,
            "origin": list(grid.origin), "negate": 0,
            "occupied_thresh": 0.65, "free_thresh": 0.196}
    yaml_path.write_text(yaml.safe_dump(meta, sort_keys=False), encoding="utf-8")
    return yaml_path
