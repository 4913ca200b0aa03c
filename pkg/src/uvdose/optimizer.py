"""Dwell-time optimization over a scan trajectory.

Every segment of a trajectory irradiates every surface point; the dose a point
collects is ``sum_i E[i, n] * dt[i]``.  The dwell times minimize total
exposure time subject to each point's class target and the per-segment floor,
then convert into manipulator speeds.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from .exceptions import DegenerateGeometry, DimensionMismatch, UnreachablePoint, UVDoseError
from .geometry import RiskClass
from .irradiance import LampAssembly, irradiance_assembly, w_m2_to_mw_cm2
from .lp import LinearProgram, LpStatus, solve

DWELL_FLOOR = 0.1
V_MAX = 0.25
MAX_CONSTRAINTS = 2000
MAX_ROUNDS = 5


class OptimizationFailed(UVDoseError):
    pass


@dataclass(frozen=True)
class DoseTargets:
    hotspot_min: float = 22.0
    nonhotspot_min: float = 5.0

    def __post_init__(self):
        if not self.hotspot_min >= self.nonhotspot_min > 0:
            raise ValueError("targets must satisfy hotspot_min >= nonhotspot_min > 0")

    def for_risk(self, risk):
        risk = np.asarray(risk)
        return np.where(risk == int(RiskClass.HOTSPOT), self.hotspot_min, self.nonhotspot_min)

    def uniform(self):
        return DoseTargets(self.hotspot_min, self.hotspot_min)


@dataclass(frozen=True)
class DoseMatrix:
    """Irradiance in mW/cm^2 of segment ``i`` on point ``n`` (``entries[i, n]``)."""

    entries: np.ndarray
    arc_lengths: np.ndarray

    def __post_init__(self):
        E = np.atleast_2d(np.asarray(self.entries, dtype=float))
        arcs = np.asarray(self.arc_lengths, dtype=float).reshape(-1)
        if E.shape[0] != len(arcs):
            raise DimensionMismatch("one arc length per segment is required")
        if not np.all(np.isfinite(E)) or np.any(E < 0):
            raise ValueError("dose matrix entries must be finite and non-negative")
        object.__setattr__(self, "entries", E)
        object.__setattr__(self, "arc_lengths", arcs)

    @property
    def n_segments(self):
        return self.entries.shape[0]

    @property
    def n_points(self):
        return self.entries.shape[1]

    def delivered(self, dwell):
        """Dose (mJ/cm^2) per point for the given dwell times."""
        return np.asarray(dwell, dtype=float) @ self.entries


@dataclass
class SpeedProfile:
    dwell: np.ndarray
    speed: np.ndarray
    arc_lengths: np.ndarray
    total_time: float
    delivered: np.ndarray
    targets: np.ndarray
    rounds: int = 1
    constrained_points: int = 0
    lp_status: LpStatus = LpStatus.OPTIMAL
    kkt_residuals: tuple = field(default=(0.0, 0.0, 0.0))

    @property
    def margin(self):
        return self.delivered - self.targets


def _points_arrays(points):
    if hasattr(points, "positions"):
        return points.positions, points.normals, np.asarray(points.risk)
    positions = np.array([p.position for p in points])
    normals = np.array([p.normal for p in points])
    risk = np.array([int(p.risk) for p in points])
    return positions, normals, risk


def build_dose_matrix(traj, points, assembly: LampAssembly, visibility=None) -> DoseMatrix:
    """Evaluate each segment's assembly pose on every surface point.

    ``visibility(lamp_position, positions) -> bool mask`` zeroes blocked
    pairs when given.
    """
    if len(traj) == 0 or len(points) == 0:
        raise ValueError("trajectory and points must be non-empty")
    positions, normals, _ = _points_arrays(points)
    E = np.empty((len(traj), len(positions)))
    for i, pose in enumerate(traj.poses):
        try:
            row = irradiance_assembly(assembly.at(pose), positions, normals)
        except DegenerateGeometry as err:
            raise DegenerateGeometry(f"segment {i}, point {err.index}: {err}",
                                     index=(i, err.index)) from None
        if visibility is not None:
            row = row * np.asarray(visibility(pose.translation, positions), dtype=float)
        E[i] = w_m2_to_mw_cm2(row)
    return DoseMatrix(E, traj.arc_lengths)


def farthest_point_subsample(positions, k, start=0):
    """Greedy farthest-point sample of ``k`` indices, deterministic from ``start``."""
    n = len(positions)
    if k >= n:
        return np.arange(n)
    chosen = np.empty(k, dtype=np.intp)
    chosen[0] = start
    dist = np.linalg.norm(positions - positions[start], axis=1)
    for j in range(1, k):
        chosen[j] = int(np.argmax(dist))
        dist = np.minimum(dist, np.linalg.norm(positions - positions[chosen[j]], axis=1))
    return np.sort(chosen)


def dwell_lower_bounds(arc_lengths, floor=DWELL_FLOOR, v_max=V_MAX):
    return np.maximum(floor, np.asarray(arc_lengths, dtype=float) / v_max)


def solve_dwell(E, targets, lower, positions=None, max_constraints=MAX_CONSTRAINTS,
                max_rounds=MAX_ROUNDS):
    """Minimum total dwell with ``E.T @ dt >= targets`` and ``dt >= lower``.

    ``E`` is (segments, points) in mW/cm^2.  Large point sets are constrained
    on a farthest-point subsample; violated points are added back and the LP
    re-solved.  The result is scaled up, if needed, so every point meets its
    target exactly.
    """
    A = np.asarray(E, dtype=float).T
    targets = np.asarray(targets, dtype=float)
    dead = np.flatnonzero(~np.any(A > 0, axis=1) & (targets > 0))
    if len(dead):
        raise UnreachablePoint(dead)
    n_points = len(A)
    if n_points > max_constraints:
        basis = positions if positions is not None else A
        active = farthest_point_subsample(np.asarray(basis, dtype=float), max_constraints)
    else:
        active = np.arange(n_points)
    rounds = 0
    while True:
        rounds += 1
        sol = solve(LinearProgram(A[active], targets[active], lower))
        if sol.status is not LpStatus.OPTIMAL:
            raise OptimizationFailed(f"dwell LP ended with status {sol.status.value}")
        dt = sol.t
        violated = np.flatnonzero(A @ dt < targets)
        violated = np.setdiff1d(violated, active)
        if len(violated) == 0 or rounds >= max_rounds:
            break
        active = np.union1d(active, violated)
    delivered = A @ dt
    need = targets > 0
    factor = float(np.max(targets[need] / delivered[need], initial=1.0)) if np.any(need) else 1.0
    if factor > 1.0:
        # interior-point optima can sit a hair below binding targets
        dt = dt * factor * (1.0 + 1e-12)
    return dt, sol, rounds, len(active)


def optimize_dwell(dm: DoseMatrix, points, targets: DoseTargets = DoseTargets(),
                   floor=DWELL_FLOOR, v_max=V_MAX, max_constraints=MAX_CONSTRAINTS,
                   max_rounds=MAX_ROUNDS) -> SpeedProfile:
    """Solve for per-segment dwell times and convert them to speeds."""
    positions, _, risk = _points_arrays(points)
    if len(risk) != dm.n_points:
        raise DimensionMismatch(f"{len(risk)} points for a matrix with {dm.n_points} columns")
    b = targets.for_risk(risk)
    lower = dwell_lower_bounds(dm.arc_lengths, floor, v_max)
    dt, sol, rounds, n_active = solve_dwell(dm.entries, b, lower, positions,
                                            max_constraints, max_rounds)
    return SpeedProfile(
        dwell=dt,
        speed=dm.arc_lengths / dt,
        arc_lengths=dm.arc_lengths.copy(),
        total_time=float(dt.sum()),
        delivered=dm.delivered(dt),
        targets=b,
        rounds=rounds,
        constrained_points=n_active,
        lp_status=sol.status,
        kkt_residuals=sol.kkt_residuals,
    )


def compare_uniform_vs_differentiated(dm: DoseMatrix, points, targets: DoseTargets = DoseTargets(),
                                      **kwargs):
    """Total time with every point at the hotspot target vs per-class targets."""
    uniform = optimize_dwell(dm, points, targets.uniform(), **kwargs)
    differentiated = optimize_dwell(dm, points, targets, **kwargs)
    return uniform.total_time, differentiated.total_time


class DwellTimeOptimizer(BaseEstimator):
    """Estimator wrapper around :func:`solve_dwell`.

    ``fit(X, risk)`` takes ``X`` of shape (n_points, n_segments) in mW/cm^2,
    i.e. one row of segment irradiances per surface point.  ``predict`` returns
    the dose each row would receive under the fitted dwell times.
    """

    def __init__(self, hotspot_min=22.0, nonhotspot_min=5.0, floor=DWELL_FLOOR, v_max=V_MAX,
                 max_constraints=MAX_CONSTRAINTS, max_rounds=MAX_ROUNDS):
        self.hotspot_min = hotspot_min
        self.nonhotspot_min = nonhotspot_min
        self.floor = floor
        self.v_max = v_max
        self.max_constraints = max_constraints
        self.max_rounds = max_rounds

    def fit(self, X, risk, arc_lengths=None, positions=None):
        X = check_array(X, ensure_min_features=1)
        risk = np.asarray(risk)
        if len(risk) != len(X):
            raise DimensionMismatch("one risk class per row of X is required")
        arcs = np.zeros(X.shape[1]) if arc_lengths is None else np.asarray(arc_lengths, float)
        dm = DoseMatrix(X.T, arcs)
        targets = DoseTargets(self.hotspot_min, self.nonhotspot_min)
        lower = dwell_lower_bounds(arcs, self.floor, self.v_max)
        b = targets.for_risk(risk)
        dt, sol, rounds, _ = solve_dwell(dm.entries, b, lower, positions,
                                         self.max_constraints, self.max_rounds)
        self.n_features_in_ = X.shape[1]
        self.dwell_ = dt
        self.speed_ = arcs / dt
        self.total_time_ = float(dt.sum())
        self.solution_ = sol
        self.n_rounds_ = rounds
        return self

    def predict(self, X):
        check_is_fitted(self, "dwell_")
        X = check_array(X)
        if X.shape[1] != self.n_features_in_:
            raise DimensionMismatch(f"expected {self.n_features_in_} segments, got {X.shape[1]}")
        return X @ self.dwell_

    def score(self, X, risk):
        """Fraction of rows whose predicted dose meets their class target."""
        b = DoseTargets(self.hotspot_min, self.nonhotspot_min).for_risk(np.asarray(risk))
        return float(np.mean(self.predict(X) >= b))


def write_speed_profile_csv(path, profile: SpeedProfile):
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["segment_index", "arc_length_m", "dwell_s", "speed_m_per_s"])
        for i, (arc, dt, v) in enumerate(zip(profile.arc_lengths, profile.dwell, profile.speed)):
            writer.writerow([i, repr(float(arc)), repr(float(dt)), repr(float(v))])
    return path


def write_dose_report_csv(path, positions, risk, dose, targets):
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["point_index", "x", "y", "z", "risk", "dose_mJ_cm2",
                         "target_mJ_cm2", "margin"])
        for i, (p, r, d, t) in enumerate(zip(positions, risk, dose, targets)):
            writer.writerow([i, *(repr(float(v)) for v in p),
                             "hotspot" if int(r) == int(RiskClass.HOTSPOT) else "nonhotspot",
                             repr(float(d)), repr(float(t)), repr(float(d - t))])
    return path
