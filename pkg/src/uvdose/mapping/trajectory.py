"""Standoff scan trajectories over surface clouds."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from ..exceptions import NoReachablePoses, TooFewPoints
from ..geometry import Pose

DEFAULT_STANDOFF = 0.3


@dataclass(frozen=True)
class BoxReachability:
    """Accept poses whose position lies inside an axis-aligned box."""

    lo: tuple = (-math.inf, -math.inf, -math.inf)
    hi: tuple = (math.inf, math.inf, math.inf)

    def __call__(self, pose):
        t = pose.translation
        return bool(np.all(t >= np.asarray(self.lo)) and np.all(t <= np.asarray(self.hi)))


def always_reachable(pose):
    return True


@dataclass(frozen=True)
class ScanTrajectory:
    """Ordered assembly poses; segment ``i`` is the path piece around pose ``i``.

    ``arc_lengths[i]`` is half the distance to each linked neighbor, so the sum
    over segments is the swept path length.  Jumps between disconnected sweep
    pieces are not attributed to any segment.
    """

    poses: tuple
    arc_lengths: np.ndarray
    standoff: float = DEFAULT_STANDOFF
    labels: tuple = field(default=())

    def __post_init__(self):
        arcs = np.asarray(self.arc_lengths, dtype=float).reshape(-1)
        if len(arcs) != len(self.poses):
            raise ValueError("one arc length per pose is required")
        object.__setattr__(self, "arc_lengths", arcs)
        object.__setattr__(self, "poses", tuple(self.poses))
        if not self.labels:
            object.__setattr__(self, "labels", ("",) * len(self.poses))

    def __len__(self):
        return len(self.poses)

    @property
    def segments(self):
        return list(zip(self.poses, self.arc_lengths))

    @property
    def positions(self):
        if not self.poses:
            return np.empty((0, 3))
        return np.array([p.translation for p in self.poses])

    @property
    def path_length(self):
        return float(self.arc_lengths.sum())

    @classmethod
    def concatenate(cls, trajectories):
        trajectories = list(trajectories)
        if not trajectories:
            return cls((), np.empty(0))
        poses = tuple(p for t in trajectories for p in t.poses)
        arcs = np.concatenate([t.arc_lengths for t in trajectories])
        labels = tuple(lbl for t in trajectories for lbl in t.labels)
        return cls(poses, arcs, trajectories[0].standoff, labels)


def dominant_plane(points):
    """Centroid and orthonormal axes (u, v, w) of a cloud, w the normal.

    Axis signs are fixed so each axis's largest-magnitude component is positive.
    """
    centroid = points.mean(axis=0)
    _, vecs = np.linalg.eigh(np.cov((points - centroid).T) if len(points) > 1 else np.eye(3))
    axes = vecs[:, ::-1].T.copy()
    for i in range(2):
        if axes[i][np.argmax(np.abs(axes[i]))] < 0:
            axes[i] *= -1
    axes[2] = np.cross(axes[0], axes[1])
    return centroid, axes


def link_arc_lengths(positions, max_link):
    """Half-distance to each neighbor closer than ``max_link``."""
    n = len(positions)
    arcs = np.zeros(n)
    if n < 2:
        return arcs
    gaps = np.linalg.norm(np.diff(positions, axis=0), axis=1)
    linked = np.where(gaps <= max_link, gaps, 0.0)
    arcs[:-1] += 0.5 * linked
    arcs[1:] += 0.5 * linked
    return arcs


def _lift_to_standoff(position, normal, tree, standoff, tol=1e-4, max_iter=100):
    for _ in range(max_iter):
        d, _ = tree.query(position)
        if d >= standoff - tol:
            break
        position = position + (standoff - d) * normal
    return position


def generate_scan_trajectory(cloud, standoff=DEFAULT_STANDOFF, reachable=None,
                             line_spacing=0.135, step=None, label="") -> ScanTrajectory:
    """Serpentine sweep at ``standoff`` over a cloud's dominant plane.

    Sweep lines run along the cloud's longest principal axis, ``line_spacing``
    apart; waypoints are ``step`` apart along each line.  Every waypoint sits
    at its nearest surface point plus ``standoff`` times that point's normal,
    then is pushed outward along the normal until no cloud point is closer
    than ``standoff``.  The lamp axis is laid across the sweep direction.
    """
    if len(cloud) == 0:
        raise TooFewPoints("cannot plan a sweep over an empty cloud")
    reachable = always_reachable if reachable is None else reachable
    step = line_spacing if step is None else step
    pts, normals = cloud.positions, cloud.normals
    centroid, (u, v, w) = dominant_plane(pts)
    if np.dot(w, normals.mean(axis=0)) < 0:
        v, w = -v, -w
    ab = np.column_stack([(pts - centroid) @ u, (pts - centroid) @ v])
    (a_min, b_min), (a_max, b_max) = ab.min(axis=0), ab.max(axis=0)

    n_a = max(1, math.ceil((a_max - a_min) / step - 1e-9)) + 1
    n_b = max(1, math.ceil((b_max - b_min) / line_spacing - 1e-9))
    a_vals = np.linspace(a_min, a_max, n_a)
    b_vals = b_min + (np.arange(n_b) + 0.5) * (b_max - b_min) / n_b

    flat = cKDTree(ab)
    full = cKDTree(pts)
    accept = 0.75 * max(step, line_spacing)
    chosen = []
    for j, b in enumerate(b_vals):
        line = a_vals if j % 2 == 0 else a_vals[::-1]
        for a in line:
            dist, idx = flat.query([a, b])
            if dist > accept or (chosen and chosen[-1] == idx):
                continue
            chosen.append(int(idx))

    poses = []
    for idx in chosen:
        n = normals[idx]
        position = _lift_to_standoff(pts[idx] + standoff * n, n, full, standoff)
        pose = Pose.look_along(position, -n, v)
        if reachable(pose):
            poses.append(pose)
    if not poses:
        raise NoReachablePoses(f"no reachable waypoint for {label or 'cloud'}")
    positions = np.array([p.translation for p in poses])
    arcs = link_arc_lengths(positions, 2.5 * max(step, line_spacing))
    return ScanTrajectory(tuple(poses), arcs, standoff, (label,) * len(poses))


def standoff_distances(trajectory, cloud):
    """Distance from each pose to its nearest cloud point."""
    d, _ = cKDTree(cloud.positions).query(trajectory.positions)
    return np.atleast_1d(d)
