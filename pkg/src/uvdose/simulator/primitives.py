"""Scene geometry: axis-aligned boxes, vertical cylinders and one-sided plane patches.

Each primitive can sample its exposed surface, report its bounds and
footprint, and test many segments at once for strict intersection with its
interior (a segment that only touches the boundary does not count).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..geometry import normalize

_FLOOR_EPS = 1e-9


def _grid(lo, hi, spacing):
    n = max(1, math.ceil((hi - lo) / spacing - 1e-9))
    return lo + (np.arange(n) + 0.5) * (hi - lo) / n


def _open_interval_overlap(t0, t1):
    """Mask of segments whose open interval (t0, t1) overlaps (0, 1)."""
    return np.maximum(t0, 0.0) < np.minimum(t1, 1.0)


@dataclass(frozen=True)
class Box:
    center: tuple
    size: tuple

    @property
    def lo(self):
        return np.asarray(self.center, float) - 0.5 * np.asarray(self.size, float)

    @property
    def hi(self):
        return np.asarray(self.center, float) + 0.5 * np.asarray(self.size, float)

    def bounds(self):
        return self.lo, self.hi

    def footprint(self):
        lo, hi = self.lo, self.hi
        return (float(lo[0]), float(lo[1]), float(hi[0]), float(hi[1]))

    def contains(self, points, margin=0.0):
        p = np.atleast_2d(points)
        return np.all((p > self.lo - margin) & (p < self.hi + margin), axis=1)

    def sample_surface(self, spacing):
        """Points and outward normals on every face except one resting on the floor."""
        lo, hi = self.lo, self.hi
        pts, nrm = [], []
        for axis in range(3):
            u, v = [a for a in range(3) if a != axis]
            gu, gv = np.meshgrid(_grid(lo[u], hi[u], spacing), _grid(lo[v], hi[v], spacing),
                                 indexing="ij")
            for sign, level in ((-1.0, lo[axis]), (1.0, hi[axis])):
                if axis == 2 and sign < 0 and level <= _FLOOR_EPS:
                    continue
                face = np.empty((gu.size, 3))
                face[:, axis] = level
                face[:, u] = gu.ravel()
                face[:, v] = gv.ravel()
                n = np.zeros(3)
                n[axis] = sign
                pts.append(face)
                nrm.append(np.tile(n, (len(face), 1)))
        return np.concatenate(pts), np.concatenate(nrm)

    def distance_to_surface(self, points):
        p = np.atleast_2d(points)
        lo, hi = self.lo, self.hi
        outside = np.maximum(np.maximum(lo - p, p - hi), 0.0)
        d_out = np.linalg.norm(outside, axis=1)
        d_in = np.min(np.minimum(p - lo, hi - p), axis=1)
        return np.where(np.any(outside > 0, axis=1), d_out, np.abs(d_in))

    def segment_hits(self, a, b):
        a, b = np.atleast_2d(a), np.atleast_2d(b)
        d = b - a
        lo, hi = self.lo, self.hi
        t0 = np.full(len(a), -np.inf)
        t1 = np.full(len(a), np.inf)
        for ax in range(3):
            moving = d[:, ax] != 0
            with np.errstate(divide="ignore", invalid="ignore"):
                ta = (lo[ax] - a[:, ax]) / d[:, ax]
                tb = (hi[ax] - a[:, ax]) / d[:, ax]
            near = np.where(moving, np.minimum(ta, tb), -np.inf)
            far = np.where(moving, np.maximum(ta, tb), np.inf)
            inside = (a[:, ax] > lo[ax]) & (a[:, ax] < hi[ax])
            near = np.where(moving | inside, near, np.inf)
            far = np.where(moving | inside, far, -np.inf)
            t0 = np.maximum(t0, near)
            t1 = np.minimum(t1, far)
        return _open_interval_overlap(t0, t1)


@dataclass(frozen=True)
class Cylinder:
    """Vertical cylinder; ``center`` is the middle of its axis."""

    center: tuple
    radius: float
    height: float

    @property
    def lo(self):
        c = np.asarray(self.center, float)
        return c - np.array([self.radius, self.radius, 0.5 * self.height])

    @property
    def hi(self):
        c = np.asarray(self.center, float)
        return c + np.array([self.radius, self.radius, 0.5 * self.height])

    def bounds(self):
        return self.lo, self.hi

    def footprint(self):
        lo, hi = self.lo, self.hi
        return (float(lo[0]), float(lo[1]), float(hi[0]), float(hi[1]))

    def contains(self, points, margin=0.0):
        p = np.atleast_2d(points)
        c = np.asarray(self.center, float)
        radial = np.hypot(p[:, 0] - c[0], p[:, 1] - c[1]) < self.radius + margin
        vertical = np.abs(p[:, 2] - c[2]) < 0.5 * self.height + margin
        return radial & vertical

    def sample_surface(self, spacing):
        c = np.asarray(self.center, float)
        z_lo, z_hi = c[2] - 0.5 * self.height, c[2] + 0.5 * self.height
        n_theta = max(8, math.ceil(2 * math.pi * self.radius / spacing))
        theta = 2 * math.pi * (np.arange(n_theta) + 0.5) / n_theta
        tt, zz = np.meshgrid(theta, _grid(z_lo, z_hi, spacing), indexing="ij")
        side_n = np.column_stack([np.cos(tt.ravel()), np.sin(tt.ravel()), np.zeros(tt.size)])
        side = np.column_stack([c[0] + self.radius * side_n[:, 0],
                                c[1] + self.radius * side_n[:, 1], zz.ravel()])
        pts, nrm = [side], [side_n]
        gx, gy = np.meshgrid(_grid(-self.radius, self.radius, spacing),
                             _grid(-self.radius, self.radius, spacing), indexing="ij")
        disk = gx.ravel() ** 2 + gy.ravel() ** 2 < self.radius ** 2
        caps = [(z_hi, 1.0)] + ([(z_lo, -1.0)] if z_lo > _FLOOR_EPS else [])
        for level, sign in caps:
            cap = np.column_stack([c[0] + gx.ravel()[disk], c[1] + gy.ravel()[disk],
                                   np.full(disk.sum(), level)])
            pts.append(cap)
            nrm.append(np.tile([0.0, 0.0, sign], (len(cap), 1)))
        return np.concatenate(pts), np.concatenate(nrm)

    def distance_to_surface(self, points):
        p = np.atleast_2d(points)
        c = np.asarray(self.center, float)
        dr = np.hypot(p[:, 0] - c[0], p[:, 1] - c[1]) - self.radius
        dz = np.abs(p[:, 2] - c[2]) - 0.5 * self.height
        outside = np.hypot(np.maximum(dr, 0), np.maximum(dz, 0))
        return np.where((dr > 0) | (dz > 0), outside, -np.maximum(dr, dz))

    def segment_hits(self, a, b):
        a, b = np.atleast_2d(a), np.atleast_2d(b)
        c = np.asarray(self.center, float)
        d = b - a
        ox, oy = a[:, 0] - c[0], a[:, 1] - c[1]
        qa = d[:, 0] ** 2 + d[:, 1] ** 2
        qb = 2 * (ox * d[:, 0] + oy * d[:, 1])
        qc = ox ** 2 + oy ** 2 - self.radius ** 2
        disc = qb ** 2 - 4 * qa * qc
        t0 = np.full(len(a), np.inf)
        t1 = np.full(len(a), -np.inf)
        radial = qa > 0
        ok = radial & (disc > 0)
        root = np.sqrt(np.where(ok, disc, 0.0))
        with np.errstate(divide="ignore", invalid="ignore"):
            t0 = np.where(ok, (-qb - root) / (2 * qa), t0)
            t1 = np.where(ok, (-qb + root) / (2 * qa), t1)
        still_inside = ~radial & (qc < 0)
        t0 = np.where(still_inside, -np.inf, t0)
        t1 = np.where(still_inside, np.inf, t1)
        z_lo, z_hi = c[2] - 0.5 * self.height, c[2] + 0.5 * self.height
        moving = d[:, 2] != 0
        with np.errstate(divide="ignore", invalid="ignore"):
            za = (z_lo - a[:, 2]) / d[:, 2]
            zb = (z_hi - a[:, 2]) / d[:, 2]
        inside_z = (a[:, 2] > z_lo) & (a[:, 2] < z_hi)
        near = np.where(moving, np.minimum(za, zb), np.where(inside_z, -np.inf, np.inf))
        far = np.where(moving, np.maximum(za, zb), np.where(inside_z, np.inf, -np.inf))
        return _open_interval_overlap(np.maximum(t0, near), np.minimum(t1, far))


@dataclass(frozen=True)
class PlanePatch:
    """One-sided rectangle; ``size = (width along right, height along up)``."""

    center: tuple
    normal: tuple
    up: tuple
    size: tuple

    def _frame(self):
        n = normalize(np.asarray(self.normal, float))
        up = np.asarray(self.up, float) - np.dot(self.up, n) * n
        up = normalize(up)
        right = np.cross(up, n)
        return n, right, up

    def corners(self):
        _, right, up = self._frame()
        c = np.asarray(self.center, float)
        w, h = 0.5 * self.size[0], 0.5 * self.size[1]
        return np.array([c + sr * w * right + su * h * up for sr in (-1, 1) for su in (-1, 1)])

    @property
    def lo(self):
        return self.corners().min(axis=0)

    @property
    def hi(self):
        return self.corners().max(axis=0)

    def bounds(self):
        return self.lo, self.hi

    def footprint(self):
        lo, hi = self.lo, self.hi
        return (float(lo[0]), float(lo[1]), float(hi[0]), float(hi[1]))

    def contains(self, points, margin=0.0):
        if margin <= 0:
            return np.zeros(len(np.atleast_2d(points)), dtype=bool)
        return self.distance_to_surface(points) < margin

    def sample_surface(self, spacing):
        n, right, up = self._frame()
        c = np.asarray(self.center, float)
        gu, gv = np.meshgrid(_grid(-0.5 * self.size[0], 0.5 * self.size[0], spacing),
                             _grid(-0.5 * self.size[1], 0.5 * self.size[1], spacing), indexing="ij")
        pts = c + gu.reshape(-1, 1) * right + gv.reshape(-1, 1) * up
        return pts, np.tile(n, (len(pts), 1))

    def distance_to_surface(self, points):
        n, right, up = self._frame()
        rel = np.atleast_2d(points) - np.asarray(self.center, float)
        du = np.maximum(np.abs(rel @ right) - 0.5 * self.size[0], 0)
        dv = np.maximum(np.abs(rel @ up) - 0.5 * self.size[1], 0)
        return np.sqrt(du ** 2 + dv ** 2 + (rel @ n) ** 2)

    def segment_hits(self, a, b):
        a, b = np.atleast_2d(a), np.atleast_2d(b)
        n, right, up = self._frame()
        c = np.asarray(self.center, float)
        sa, sb = (a - c) @ n, (b - c) @ n
        crossing = sa * sb < 0
        with np.errstate(divide="ignore", invalid="ignore"):
            t = np.where(crossing, sa / (sa - sb), 0.0)
        q = a + t[:, None] * (b - a) - c
        inside = (np.abs(q @ right) < 0.5 * self.size[0]) & (np.abs(q @ up) < 0.5 * self.size[1])
        return crossing & inside


def primitive_from_dict(spec):
    kind = spec["type"].lower()
    if kind == "box":
        return Box(tuple(spec["center"]), tuple(spec["size"]))
    if kind == "cylinder":
        return Cylinder(tuple(spec["center"]), float(spec["radius"]), float(spec["height"]))
    if kind in ("plane", "patch", "plane_patch"):
        return PlanePatch(tuple(spec["center"]), tuple(spec["normal"]),
                          tuple(spec.get("up", (0.0, 0.0, 1.0))), tuple(spec["size"]))
    raise ValueError(f"unknown primitive type {spec['type']!r}")


def primitive_to_dict(prim):
    if isinstance(prim, Box):
        return {"type": "box", "center": list(prim.center), "size": list(prim.size)}
    if isinstance(prim, Cylinder):
        return {"type": "cylinder", "center": list(prim.center), "radius": prim.radius,
                "height": prim.height}
    return {"type": "plane", "center": list(prim.center), "normal": list(prim.normal),
            "up": list(prim.up), "size": list(prim.size)}
