"""Probabilistic occupancy octree with log-odds leaves.

Leaves live in a hash map keyed by their integer index at ``max_depth``; an
inner node at depth ``d`` covers the ``2**(max_depth - d)`` leaves per axis
below it and reports the maximum log-odds of its known children, as OctoMap
does.  Child extents are exactly half of the parent's along each axis.
"""

from __future__ import annotations

import math

import numpy as np

from .._validation import check_points
from ..exceptions import OutOfBounds

L_HIT = 0.85
L_MISS = -0.4
L_MIN = -2.0
L_MAX = 3.5


def probability(log_odds):
    return 1.0 / (1.0 + np.exp(-np.asarray(log_odds, dtype=float)))


class OccupancyOctree:
    """Sparse occupancy octree.

    Parameters
    ----------
    resolution : float
        Leaf edge length in meters.
    max_depth : int
        Tree depth; the root cube has edge ``resolution * 2**max_depth``.
    center : array-like
        World position of the root cube's center.
    """

    def __init__(self, resolution=0.02, max_depth=10, center=(0.0, 0.0, 0.0),
                 l_hit=L_HIT, l_miss=L_MISS, l_min=L_MIN, l_max=L_MAX):
        if resolution <= 0:
            raise ValueError("resolution must be positive")
        if not 1 <= int(max_depth) <= 21:
            raise ValueError("max_depth must be in [1, 21]")
        self.resolution = float(resolution)
        self.max_depth = int(max_depth)
        self.center = np.asarray(center, dtype=float).reshape(3)
        self.l_hit, self.l_miss = float(l_hit), float(l_miss)
        self.l_min, self.l_max = float(l_min), float(l_max)
        self.n_cells = 2 ** self.max_depth
        self.size = self.resolution * self.n_cells
        self.origin = self.center - 0.5 * self.size
        self._leaves = {}
        self._occupied_cache = {}

    @classmethod
    def covering(cls, lo, hi, resolution=0.02, **kwargs):
        """Smallest tree whose root is anchored at ``lo`` and spans ``hi``."""
        lo = np.asarray(lo, dtype=float)
        extent = float(np.max(np.asarray(hi, dtype=float) - lo))
        depth = max(1, math.ceil(math.log2(max(extent / resolution, 1.0)) + 1e-12))
        size = resolution * 2 ** depth
        return cls(resolution, depth, center=lo + 0.5 * size, **kwargs)

    def __len__(self):
        return len(self._leaves)

    # -- keys -------------------------------------------------------------
    def in_bounds(self, points):
        p = check_points(points)
        rel = p - self.origin
        return np.all((rel >= 0) & (rel < self.size), axis=1)

    def keys_of(self, points):
        p = check_points(points)
        if not np.all(self.in_bounds(p)):
            bad = p[~self.in_bounds(p)][0]
            raise OutOfBounds(f"point {bad.tolist()} lies outside the map extent")
        keys = np.floor((p - self.origin) / self.resolution).astype(np.int64)
        return np.minimum(keys, self.n_cells - 1)

    def key_of(self, point):
        return tuple(int(k) for k in self.keys_of(point)[0])

    def center_of(self, key):
        return self.origin + (np.asarray(key, dtype=float) + 0.5) * self.resolution

    def node_key(self, leaf_key, depth):
        """Key of the depth-``depth`` ancestor of a leaf."""
        shift = self.max_depth - depth
        return tuple(int(k) >> shift for k in leaf_key)

    def node_bounds(self, depth, key):
        edge = self.size / 2 ** depth
        lo = self.origin + np.asarray(key, dtype=float) * edge
        return lo, lo + edge

    def children(self, depth, key):
        if depth >= self.max_depth:
            return []
        return [(depth + 1, (2 * key[0] + dx, 2 * key[1] + dy, 2 * key[2] + dz))
                for dx in (0, 1) for dy in (0, 1) for dz in (0, 1)]

    # -- queries ----------------------------------------------------------
    def log_odds(self, key):
        """Log-odds of a leaf, or ``None`` when it was never observed."""
        return self._leaves.get(tuple(key))

    def query(self, point):
        return self._leaves.get(self.key_of(point))

    def node_log_odds(self, depth, key):
        """Max log-odds over the known leaves below an inner node."""
        if depth == self.max_depth:
            return self._leaves.get(tuple(key))
        best = None
        for leaf_key, value in self._leaves.items():
            if self.node_key(leaf_key, depth) == tuple(key):
                best = value if best is None else max(best, value)
        return best

    def is_occupied(self, key, threshold=0.5):
        value = self._leaves.get(tuple(key))
        return value is not None and probability(value) > threshold

    def leaves(self):
        """Iterate ``(key, log_odds)`` in sorted key order (deterministic)."""
        for key in sorted(self._leaves):
            yield key, self._leaves[key]

    def occupied_keys(self, threshold=0.5):
        # p > threshold  <=>  log-odds > logit(threshold), as p is monotone
        cut = math.log(threshold / (1.0 - threshold))
        return [k for k, v in self.leaves() if v > cut]

    def occupied_centers(self, threshold=0.5):
        if threshold not in self._occupied_cache:
            keys = self.occupied_keys(threshold)
            centers = self.center_of(np.array(keys)) if keys else np.empty((0, 3))
            centers.setflags(write=False)
            self._occupied_cache[threshold] = centers
        return self._occupied_cache[threshold]

    # -- updates ----------------------------------------------------------
    def _update(self, key, delta):
        self._occupied_cache.clear()
        value = self._leaves.get(key, 0.0) + delta
        self._leaves[key] = min(max(value, self.l_min), self.l_max)

    def traverse(self, start, end):
        """Leaf keys crossed by the segment ``start -> end``, ``end``'s leaf last.

        Amanatides-Woo voxel walk.
        """
        start = np.asarray(start, dtype=float)
        end = np.asarray(end, dtype=float)
        key = list(self.key_of(start))
        end_key = self.key_of(end)
        direction = end - start
        step = [0, 0, 0]
        t_max = [math.inf] * 3
        t_delta = [math.inf] * 3
        for ax in range(3):
            d = direction[ax]
            if d > 0:
                step[ax] = 1
                boundary = self.origin[ax] + (key[ax] + 1) * self.resolution
                t_max[ax] = (boundary - start[ax]) / d
                t_delta[ax] = self.resolution / d
            elif d < 0:
                step[ax] = -1
                boundary = self.origin[ax] + key[ax] * self.resolution
                t_max[ax] = (boundary - start[ax]) / d
                t_delta[ax] = -self.resolution / d
        path = [tuple(key)]
        limit = sum(abs(a - b) for a, b in zip(key, end_key)) + 3
        while tuple(key) != end_key and len(path) <= limit:
            ax = min(range(3), key=lambda a: t_max[a])
            if t_max[ax] > 1.0:
                break
            key[ax] += step[ax]
            t_max[ax] += t_delta[ax]
            path.append(tuple(key))
        if path[-1] != end_key:
            # rounding at a boundary; the endpoint leaf is authoritative
            path.append(end_key)
        return path

    def traverse_many(self, starts, ends):
        """Vectorized :meth:`traverse` for many segments.

        Returns ``(ray_index, keys)`` listing every leaf crossed before each
        segment's end leaf, plus the end keys (one per segment).
        """
        starts = np.asarray(starts, dtype=float).reshape(-1, 3)
        ends = np.asarray(ends, dtype=float).reshape(-1, 3)
        key = self.keys_of(starts)
        end_key = self.keys_of(ends)
        d = ends - starts
        step = np.sign(d).astype(np.int64)
        with np.errstate(divide="ignore", invalid="ignore"):
            boundary = self.origin + (key + (step > 0)) * self.resolution
            t_max = np.where(step != 0, (boundary - starts) / d, np.inf)
            t_delta = np.where(step != 0, self.resolution / np.abs(d), np.inf)
        active = np.any(key != end_key, axis=1)
        rays, visited = [], []
        limit = int(np.abs(end_key - key).sum(axis=1).max(initial=0)) + 3
        for _ in range(limit):
            idx = np.flatnonzero(active)
            if len(idx) == 0:
                break
            rays.append(idx)
            visited.append(key[idx].copy())
            ax = np.argmin(t_max[idx], axis=1)
            over = t_max[idx, ax] > 1.0
            move = idx[~over]
            axm = ax[~over]
            key[move, axm] += step[move, axm]
            t_max[move, axm] += t_delta[move, axm]
            active[idx[over]] = False
            active[move] = np.any(key[move] != end_key[move], axis=1)
        if rays:
            ray_index = np.concatenate(rays)
            keys = np.concatenate(visited)
        else:
            ray_index = np.empty(0, dtype=np.intp)
            keys = np.empty((0, 3), dtype=np.int64)
        return ray_index, keys, end_key

    def _unique_keys(self, keys):
        # row-unique via a linear index, much cheaper than np.unique(axis=0)
        n = np.int64(self.n_cells)
        flat = np.unique((keys[:, 0] * n + keys[:, 1]) * n + keys[:, 2])
        return zip((flat // (n * n)).tolist(), (flat // n % n).tolist(), (flat % n).tolist())

    def integrate_batch(self, origins, hits):
        """Insert many rays as one scan, OctoMap point-cloud style.

        Each leaf is updated at most once per batch: ``l_hit`` if any ray ends
        in it, otherwise ``l_miss`` if any ray crosses it.
        """
        hits = np.asarray(hits, dtype=float).reshape(-1, 3)
        origins = np.broadcast_to(np.asarray(origins, dtype=float), hits.shape)
        if len(hits) == 0:
            return self
        _, crossed, end_keys = self.traverse_many(origins, hits)
        occ = set(self._unique_keys(end_keys))
        free = set(self._unique_keys(crossed))
        for key in sorted(free - occ):
            self._update(key, self.l_miss)
        for key in sorted(occ):
            self._update(key, self.l_hit)
        return self

    def integrate_scan(self, origin, hits):
        """Insert a scan taken from ``origin``; returns ``self``.

        Rays are applied in order: every leaf a ray crosses before its hit
        gets ``l_miss``, the hit leaf gets ``l_hit``; values are clamped.
        """
        hits = np.asarray(hits, dtype=float).reshape(-1, 3)
        origin = np.asarray(origin, dtype=float).reshape(3)
        self.key_of(origin)
        if len(hits):
            self.keys_of(hits)
        for hit in hits:
            path = self.traverse(origin, hit)
            for key in path[:-1]:
                self._update(key, self.l_miss)
            self._update(path[-1], self.l_hit)
        return self
