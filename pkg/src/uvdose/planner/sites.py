"""Hotspot sites, chassis stop points and visit ordering."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..exceptions import NoFreeStopPoint, NoPath, UnreachableSite
from ..geometry import RiskClass
from .risk import RiskRegistry
from .search import astar, path_cost

STOP_DISTANCE = 0.6
N_BEARINGS = 16


@dataclass(frozen=True)
class Detection:
    """A labeled object footprint ``(xmin, ymin, xmax, ymax)`` in meters."""

    label: str
    footprint: tuple
    object_id: str = ""


@dataclass(frozen=True)
class HotspotSite:
    object_id: str
    label: str
    footprint: tuple
    stop_point: tuple
    risk: RiskClass = RiskClass.HOTSPOT
    footprint_cells: tuple = field(default=(), compare=False)

    @property
    def centroid(self):
        x0, y0, x1, y1 = self.footprint
        return 0.5 * (x0 + x1), 0.5 * (y0 + y1)


def _exit_distance(half_w, half_h, theta):
    """Distance from a rectangle's center to its boundary along ``theta``."""
    c, s = abs(math.cos(theta)), abs(math.sin(theta))
    limits = []
    if c > 1e-12:
        limits.append(half_w / c)
    if s > 1e-12:
        limits.append(half_h / s)
    return min(limits)


def stop_point_candidates(footprint, stop_distance=STOP_DISTANCE, clearance=0.0,
                          n_bearings=N_BEARINGS):
    """(bearing index, radius, x, y) on a ring around the footprint centroid.

    The radius is ``stop_distance``, extended where the footprint boundary
    plus ``clearance`` reaches farther along that bearing.
    """
    x0, y0, x1, y1 = footprint
    cx, cy = 0.5 * (x0 + x1), 0.5 * (y0 + y1)
    out = []
    for k in range(n_bearings):
        theta = 2.0 * math.pi * k / n_bearings
        r = max(stop_distance, _exit_distance(0.5 * (x1 - x0), 0.5 * (y1 - y0), theta) + clearance)
        out.append((k, r, cx + r * math.cos(theta), cy + r * math.sin(theta)))
    return out


def choose_stop_point(grid, footprint, stop_distance=STOP_DISTANCE, clearance=0.0,
                      n_bearings=N_BEARINGS):
    """Nearest free ring candidate; ties go to the smallest bearing index."""
    best = None
    for k, r, x, y in stop_point_candidates(footprint, stop_distance, clearance, n_bearings):
        cell = grid.world_to_cell(x, y)
        if grid.is_free(cell) and (best is None or r < best[0] - 1e-12):
            best = (r, k, cell)
    if best is None:
        raise NoFreeStopPoint(f"every stop-point candidate around {footprint} is blocked")
    return best[2]


def footprint_cells(grid, footprint):
    x0, y0, x1, y1 = footprint
    r0, c0 = grid.world_to_cell(x0, y0)
    r1, c1 = grid.world_to_cell(x1, y1)
    return tuple((r, c) for r in range(max(r0, 0), min(r1, grid.shape[0] - 1) + 1)
                 for c in range(max(c0, 0), min(c1, grid.shape[1] - 1) + 1))


def mark_hotspots(grid, detections, registry=None, stop_distance=STOP_DISTANCE,
                  clearance=0.0, hotspots_only=True):
    """Turn detections into sites with chassis stop points.

    With ``hotspots_only`` (the default) non-hotspot detections are dropped.
    """
    registry = RiskRegistry.default() if registry is None else registry
    sites = []
    for i, det in enumerate(detections):
        risk = registry[det.label]
        if hotspots_only and risk is not RiskClass.HOTSPOT:
            continue
        stop = choose_stop_point(grid, det.footprint, stop_distance, clearance)
        sites.append(HotspotSite(det.object_id or f"object-{i}", det.label, tuple(det.footprint),
                                 stop, risk, footprint_cells(grid, det.footprint)))
    return sites


def distance_matrix(grid, cells):
    """Pairwise A* path costs (meters) and paths between cells."""
    n = len(cells)
    D = np.zeros((n, n))
    paths = {}
    for i in range(n):
        for j in range(i + 1, n):
            try:
                path = astar(grid, cells[i], cells[j])
            except NoPath:
                raise UnreachableSite(cells[i], cells[j]) from None
            D[i, j] = D[j, i] = path_cost(path) * grid.resolution
            paths[(i, j)] = path
            paths[(j, i)] = path[::-1]
    return D, paths


def open_tour_length(order, D):
    """Length of the path start(0) -> order[0] -> ... (indices into D)."""
    seq = [0, *order]
    return float(sum(D[a, b] for a, b in zip(seq, seq[1:])))


def nearest_neighbor_order(D, first=None):
    """Greedy order from node 0, optionally forcing the first stop."""
    n = len(D) - 1
    remaining = set(range(1, n + 1))
    current, order = 0, []
    if first is not None:
        order.append(first)
        remaining.remove(first)
        current = first
    while remaining:
        nxt = min(remaining, key=lambda j: (D[current, j], j))
        order.append(nxt)
        remaining.remove(nxt)
        current = nxt
    return order


def two_opt(order, D):
    """Reverse sub-paths while that shortens the open path from node 0."""
    seq = [0, *order]
    n = len(seq)
    improved = True
    while improved:
        improved = False
        for i in range(1, n - 1):
            for j in range(i + 1, n):
                before = D[seq[i - 1], seq[i]] + (D[seq[j], seq[j + 1]] if j + 1 < n else 0.0)
                after = D[seq[i - 1], seq[j]] + (D[seq[i], seq[j + 1]] if j + 1 < n else 0.0)
                if after < before - 1e-12:
                    seq[i:j + 1] = seq[i:j + 1][::-1]
                    improved = True
    return seq[1:]


def or_opt(order, D, max_segment=3):
    """Relocate runs of up to ``max_segment`` nodes while that shortens the path."""
    seq = list(order)
    best = open_tour_length(seq, D)
    improved = True
    while improved:
        improved = False
        for size in range(1, min(max_segment, len(seq) - 1) + 1):
            for i in range(len(seq) - size + 1):
                run = seq[i:i + size]
                rest = seq[:i] + seq[i + size:]
                for j in range(len(rest) + 1):
                    if j == i:
                        continue
                    for piece in (run, run[::-1]):
                        cand = rest[:j] + piece + rest[j:]
                        length = open_tour_length(cand, D)
                        if length < best - 1e-12:
                            seq, best, improved = cand, length, True
                            break
                    if improved:
                        break
                if improved:
                    break
            if improved:
                break
    return seq


def local_search(order, D):
    """Alternate 2-opt and or-opt until neither shortens the path."""
    current = two_opt(order, D)
    while True:
        moved = two_opt(or_opt(current, D), D)
        if open_tour_length(moved, D) >= open_tour_length(current, D) - 1e-12:
            return current
        current = moved


def order_sites(sites, start, grid):
    """Visit order (indices into ``sites``) from the chassis ``start`` cell."""
    if not sites:
        raise ValueError("at least one site is required")
    cells = [tuple(start)] + [s.stop_point for s in sites]
    D, _ = distance_matrix(grid, cells)
    best = None
    # one greedy start per possible first stop, each polished by local search
    for first in [None, *range(1, len(D))]:
        order = local_search(nearest_neighbor_order(D, first), D)
        length = open_tour_length(order, D)
        if best is None or length < best[0] - 1e-12:
            best = (length, order)
    order = best[1]
    return [k - 1 for k in order]
