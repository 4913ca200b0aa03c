import numpy as np
import pytest

from uvdose.simulator.scene import Scene


def single_object_scene(label="table", probes=True, **extra):
    data = {
        "name": "single",
        "room": {"size": [4.0, 4.0, 2.5]},
        "assembly": {"radiant_flux": 5.0},
        "objects": [{"id": "t", "label": label,
                     "shape": {"type": "box", "center": [2.01, 2.01, 0.405],
                               "size": [0.6, 0.44, 0.81]}}],
        "probes": [
            {"id": "top", "position": [2.01, 2.01, 0.81], "object": "t"},
            {"id": "side", "position": [2.31, 2.01, 0.41], "object": "t"},
        ] if probes else [],
    }
    data.update(extra)
    return Scene.from_dict(data)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def small_scene():
    return single_object_scene()


ORACLE_COMBINATIONS = 200_000


def random_lp(rng, max_vars=12, max_constraints=20, lb_zero=False):
    """Random dose LP small enough for vertex enumeration (sizes drawn until
    the candidate-vertex count fits the oracle budget)."""
    import math

    from uvdose.lp import LinearProgram

    while True:
        n = int(rng.integers(1, max_vars + 1))
        m = int(rng.integers(1, max_constraints + 1))
        if math.comb(m + n, n) <= ORACLE_COMBINATIONS:
            break
    A = rng.uniform(0.0, 1.0, (m, n))
    A[rng.uniform(size=(m, n)) < 0.3] = 0.0
    for i in np.flatnonzero(A.sum(axis=1) == 0):
        A[i, rng.integers(n)] = rng.uniform(0.1, 1.0)
    b = rng.uniform(1.0, 10.0, m)
    lb = np.zeros(n) if lb_zero else rng.choice([0.0, 0.1, 0.5], n)
    return LinearProgram(A, b, lb)


def dijkstra_cost(cells_free, start, goal):
    """Oracle shortest path cost on an 8-connected grid (no corner cutting),
    built independently of the planner with scipy's csgraph Dijkstra."""
    import math

    from scipy.sparse import lil_matrix
    from scipy.sparse.csgraph import dijkstra

    h, w = cells_free.shape
    graph = lil_matrix((h * w, h * w))
    for r in range(h):
        for c in range(w):
            if not cells_free[r, c]:
                continue
            for dr in (-1, 0, 1):
                for dc in (-1, 0, 1):
                    rr, cc = r + dr, c + dc
                    if (dr, dc) == (0, 0) or not (0 <= rr < h and 0 <= cc < w):
                        continue
                    if not cells_free[rr, cc]:
                        continue
                    if dr and dc and not (cells_free[r + dr, c] and cells_free[r, c + dc]):
                        continue
                    graph[r * w + c, rr * w + cc] = math.sqrt(2.0) if dr and dc else 1.0
    dist = dijkstra(graph.tocsr(), indices=start[0] * w + start[1])
    return float(dist[goal[0] * w + goal[1]])


def random_grid(rng, size=20, density=0.25):
    """Random obstacle grid plus two distinct free cells."""
    from uvdose.planner import OCCUPIED, GridMap

    cells = np.where(rng.uniform(size=(size, size)) < density, OCCUPIED, 0)
    free = np.argwhere(cells == 0)
    a, b = rng.choice(len(free), 2, replace=False)
    return GridMap(cells, 0.05), tuple(free[a]), tuple(free[b])


def octile_pair(cost, max_steps=10_000):
    """Integers (a, b) with a + b*sqrt(2) == cost; unique since sqrt(2) is irrational."""
    import math

    for b in range(max_steps):
        a = cost - b * math.sqrt(2.0)
        if a < -1e-9:
            break
        if abs(a - round(a)) < 1e-9:
            return int(round(a)), b
    raise ValueError(f"{cost} is not an octile path cost")


def path_pair(path):
    straight = sum(1 for p, q in zip(path, path[1:]) if p[0] == q[0] or p[1] == q[1])
    return straight, len(path) - 1 - straight
