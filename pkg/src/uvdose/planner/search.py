"""8-connected A* on occupancy grids."""

from __future__ import annotations

import heapq
import math

from ..exceptions import NoPath

SQRT2 = math.sqrt(2.0)
_MOVES = [(-1, 0), (1, 0), (0, -1), (0, 1), (-1, -1), (-1, 1), (1, -1), (1, 1)]


def octile(a, b):
    dr, dc = abs(a[0] - b[0]), abs(a[1] - b[1])
    return (max(dr, dc) - min(dr, dc)) + SQRT2 * min(dr, dc)


def neighbors(grid, cell):
    """Free 8-neighbors with step cost; diagonals need both side cells free."""
    r, c = cell
    for dr, dc in _MOVES:
        nxt = (r + dr, c + dc)
        if not grid.is_free(nxt):
            continue
        if dr and dc:
            if not (grid.is_free((r + dr, c)) and grid.is_free((r, c + dc))):
                continue
            yield nxt, SQRT2
        else:
            yield nxt, 1.0


def path_cost(path):
    """Exact cost ``n_straight + sqrt(2) * n_diagonal`` of a cell path (in cells)."""
    straight = diagonal = 0
    for a, b in zip(path, path[1:]):
        if a[0] != b[0] and a[1] != b[1]:
            diagonal += 1
        else:
            straight += 1
    return straight + SQRT2 * diagonal


def astar(grid, start, goal):
    """Shortest 8-connected path from ``start`` to ``goal`` (both cells, inclusive).

    Heap entries are ordered by (f, h, cell index) so equal-cost expansions
    are deterministic.
    """
    start, goal = tuple(start), tuple(goal)
    if not grid.is_free(start) or not grid.is_free(goal):
        raise NoPath(start, goal)
    g = {start: 0.0}
    parent = {start: None}
    h0 = octile(start, goal)
    heap = [(h0, h0, grid.cell_index(start), start)]
    closed = set()
    while heap:
        _, _, _, cell = heapq.heappop(heap)
        if cell in closed:
            continue
        if cell == goal:
            path = []
            while cell is not None:
                path.append(cell)
                cell = parent[cell]
            return path[::-1]
        closed.add(cell)
        for nxt, step in neighbors(grid, cell):
            if nxt in closed:
                continue
            cand = g[cell] + step
            if cand < g.get(nxt, math.inf):
                g[nxt] = cand
                parent[nxt] = cell
                h = octile(nxt, goal)
                heapq.heappush(heap, (cand + h, h, grid.cell_index(nxt), nxt))
    raise NoPath(start, goal)


def path_length_m(grid, path):
    return path_cost(path) * grid.resolution
