"""End-to-end mission simulation: scan, plan, optimize, irradiate, report."""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from ..exceptions import NoPath, NoReachablePoses, UnreachablePoint
from ..geometry import Pose, RiskClass
from ..irradiance import LampAssembly, accumulate_dose, irradiance_assembly, irradiance_closed_form
from ..mapping.surface import SurfaceCloud, estimate_normals, extract_surface
from ..mapping.trajectory import ScanTrajectory, generate_scan_trajectory
from ..lp import LinearProgram
from ..optimizer import SpeedProfile, build_dose_matrix, dwell_lower_bounds, solve_dwell
from ..planner.grid import FREE, OCCUPIED, GridMap
from ..planner.search import astar, path_length_m
from ..planner.sites import Detection, mark_hotspots, order_sites
from .primitives import PlanePatch
from .report import MissionReport, evaluate_probes, summarize_points
from .scan import synthesize_scan, visibility_mask

log = logging.getLogger("uvdose.simulator")


class Policy(str, enum.Enum):
    DIFFERENTIATED = "Differentiated"
    UNIFORM_HIGH = "UniformHigh"
    FIXED_STATION = "FixedStation"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        aliases = {"diff": cls.DIFFERENTIATED, "uniform": cls.UNIFORM_HIGH,
                   "station": cls.FIXED_STATION}
        key = str(value).strip()
        if key.lower() in aliases:
            return aliases[key.lower()]
        for member in cls:
            if member.value.lower() == key.lower():
                return member
        raise ValueError(f"unknown policy {value!r}")


@dataclass(frozen=True)
class ArmReach:
    """Poses inside the room, outside every primitive, near the chassis stop point."""

    stop_xy: tuple
    reach: tuple
    room: tuple
    primitives: tuple = ()

    def __call__(self, pose):
        t = pose.translation
        rx, ry, zmin, zmax = self.reach
        if abs(t[0] - self.stop_xy[0]) > rx or abs(t[1] - self.stop_xy[1]) > ry:
            return False
        if not zmin <= t[2] <= zmax:
            return False
        if np.any(t <= 0) or np.any(t >= np.asarray(self.room)):
            return False
        return not any(bool(p.contains(t)[0]) for p in self.primitives)


@dataclass
class SitePlan:
    object_id: str
    label: str
    risk: RiskClass
    stop_point: tuple
    trajectory: ScanTrajectory
    profile: SpeedProfile
    points: slice
    lp: LinearProgram = field(default=None, repr=False)

    def to_dict(self):
        return {
            "object_id": self.object_id,
            "label": self.label,
            "risk": self.risk.name.lower(),
            "stop_point": [float(v) for v in self.stop_point],
            "n_poses": len(self.trajectory),
            "n_points": self.points.stop - self.points.start,
            "dwell_total_s": float(self.profile.total_time),
            "lp_rounds": int(self.profile.rounds),
        }


@dataclass
class StationPlan:
    position: tuple
    duration: float

    def to_dict(self):
        return {"position": [float(v) for v in self.position], "duration_s": float(self.duration)}


@dataclass
class MissionPlan:
    policy: Policy
    sites: list
    paths: list
    path_lengths: list
    cloud: SurfaceCloud
    targets: np.ndarray
    travel_time: float
    irradiation_time: float
    grid: GridMap = field(repr=False, default=None)

    @property
    def order(self):
        return [getattr(s, "object_id", f"station-{i}") for i, s in enumerate(self.sites)]

    def to_dict(self):
        return {
            "policy": self.policy.value,
            "order": self.order,
            "sites": [s.to_dict() for s in self.sites],
            "paths": [[[float(x), float(y)] for x, y in p] for p in self.paths],
            "path_lengths_m": [float(v) for v in self.path_lengths],
            "travel_time_s": float(self.travel_time),
            "irradiation_time_s": float(self.irradiation_time),
            "n_points": len(self.cloud),
        }


# -- maps ------------------------------------------------------------------
def build_grid(scene):
    """Chassis grid: object/obstacle footprints and the room boundary, inflated."""
    res = float(scene.planning["grid_resolution"])
    grid = GridMap.empty(scene.room[0], scene.room[1], res)
    grid.cells[0, :] = grid.cells[-1, :] = OCCUPIED
    grid.cells[:, 0] = grid.cells[:, -1] = OCCUPIED
    for prim in scene.primitives:
        x0, y0, x1, y1 = prim.footprint()
        # every cell the footprint overlaps, so thin patches still block
        r0, c0 = grid.world_to_cell(x0, y0)
        r1, c1 = grid.world_to_cell(x1, y1)
        r0, c0 = max(r0, 0), max(c0, 0)
        r1, c1 = min(r1, grid.shape[0] - 1), min(c1, grid.shape[1] - 1)
        grid.cells[r0:r1 + 1, c0:c1 + 1] = OCCUPIED
    return grid.inflated(float(scene.config["chassis"]["inflation"]))


def object_clouds(scene, tree=None):
    """One oriented surface cloud per scene object, in scene order."""
    tree = synthesize_scan(scene) if tree is None else tree
    planning = scene.planning
    registry = scene.registry()
    res = tree.resolution
    clouds = []
    for obj in scene.objects:
        lo, hi = obj.primitive.bounds()
        cloud = extract_surface(tree, (lo - res, hi + res), obj.primitive.center,
                                registry[obj.label], obj.id, planning["outlier_k"],
                                planning["outlier_alpha"])
        if isinstance(obj.primitive, PlanePatch):
            vp = cloud.positions + np.asarray(obj.primitive.normal, dtype=float)
        else:
            vp = 2.0 * cloud.positions - np.asarray(obj.primitive.center, dtype=float)
        cloud = SurfaceCloud(cloud.positions, cloud.normals, cloud.risk, cloud.dose, obj.id, vp)
        clouds.append(estimate_normals(cloud, planning["normal_k"]))
    return clouds


def normal_patches(normals):
    """Group points by dominant normal direction; returns (key, indices) pairs."""
    axis = np.argmax(np.abs(normals), axis=1)
    sign = normals[np.arange(len(normals)), axis] >= 0
    key = 2 * axis + sign
    return [(int(k), np.flatnonzero(key == k)) for k in np.unique(key)]


def planning_targets(scene, risk, policy):
    targets = scene.targets if policy is Policy.DIFFERENTIATED else scene.targets.uniform()
    b = targets.for_risk(risk).astype(float)
    if scene.planning["plan_to_thresholds"]:
        thr = scene.thresholds
        b = np.maximum(b, thr["overall"])
        hot = np.asarray(risk) == int(RiskClass.HOTSPOT)
        b[hot] = np.maximum(b[hot], thr["hotspot"])
    return b


def arm_assembly(scene):
    a = scene.config["assembly"]
    return LampAssembly(Pose.identity(), a["radiant_flux"], a["length"], a["spacing"])


def _chassis_paths(grid, start_cell, goal_cells, labels):
    paths, lengths = [], []
    current = start_cell
    for cell, label in zip(goal_cells, labels):
        try:
            path = astar(grid, current, cell)
        except NoPath as err:
            raise NoPath(err.start, err.goal, site=label) from None
        paths.append([grid.cell_center(c) for c in path])
        lengths.append(path_length_m(grid, path))
        current = cell
    return paths, lengths


def _start_cell(scene, grid):
    sx, sy = scene.config["chassis"]["start"][:2]
    cell = grid.world_to_cell(sx, sy)
    if not grid.is_free(cell):
        raise NoPath(cell, cell, site="chassis start")
    return cell


def reachable_region(grid, start):
    """Copy of ``grid`` with free cells cut off from ``start`` marked occupied.

    A* forbids corner cutting, so its reachable set is the 4-connected
    component of free cells.
    """
    labels, _ = ndimage.label(grid.cells == FREE)
    cells = grid.cells.copy()
    cells[labels != labels[start]] = OCCUPIED
    return GridMap(cells, grid.resolution, grid.origin)


# -- arm policies ----------------------------------------------------------
def plan_arm_mission(scene, policy, clouds=None, grid=None):
    policy = Policy.parse(policy)
    planning = scene.planning
    clouds = object_clouds(scene) if clouds is None else clouds
    grid = build_grid(scene) if grid is None else grid
    start = _start_cell(scene, grid)
    registry = scene.registry()
    grid = reachable_region(grid, start)

    detections = [Detection(o.label, o.primitive.footprint(), o.id) for o in scene.objects]
    sites = mark_hotspots(grid, detections, registry, planning["stop_distance"],
                          planning["stop_clearance"], hotspots_only=False)
    order = order_sites(sites, start, grid) if sites else []
    paths, lengths = _chassis_paths(grid, start, [sites[k].stop_point for k in order],
                                    [sites[k].object_id for k in order])

    cloud = SurfaceCloud.concatenate(clouds, scene.name)
    offsets = np.cumsum([0] + [len(c) for c in clouds])
    targets = planning_targets(scene, cloud.risk, policy)
    assembly = arm_assembly(scene)
    spacing = planning["line_spacing"] or assembly.length
    index_of = {o.id: i for i, o in enumerate(scene.objects)}
    site_plans = []
    for k in order:
        site = sites[k]
        i = index_of[site.object_id]
        obj_cloud = clouds[i]
        sl = slice(int(offsets[i]), int(offsets[i + 1]))
        stop_xy = grid.cell_center(site.stop_point)
        reach = ArmReach(stop_xy, tuple(planning["reach"]), tuple(scene.room),
                         tuple(scene.primitives))
        trajs = []
        for key, idx in normal_patches(obj_cloud.normals):
            if len(idx) < planning["min_patch_points"]:
                continue
            try:
                trajs.append(generate_scan_trajectory(
                    obj_cloud.subset(idx), planning["standoff"], reach, spacing,
                    label=f"{site.object_id}/{key}"))
            except NoReachablePoses:
                log.info("site %s: patch %d has no reachable pose", site.object_id, key)
        if not trajs:
            raise UnreachablePoint(np.arange(sl.start, sl.stop), site=site.object_id)
        traj = ScanTrajectory.concatenate(trajs)
        dm = build_dose_matrix(traj, obj_cloud, assembly)
        lower = dwell_lower_bounds(dm.arc_lengths, planning["floor"], planning["v_max"])
        try:
            dt, sol, rounds, n_active = solve_dwell(dm.entries, targets[sl], lower,
                                                    obj_cloud.positions,
                                                    planning["max_constraints"])
        except UnreachablePoint as err:
            raise UnreachablePoint([sl.start + j for j in err.indices],
                                   site=site.object_id) from None
        profile = SpeedProfile(dt, dm.arc_lengths / dt, dm.arc_lengths.copy(), float(dt.sum()),
                               dm.delivered(dt), targets[sl], rounds, n_active, sol.status,
                               sol.kkt_residuals)
        log.info("site %s: %d poses, %d points, dwell %.1f s", site.object_id, len(traj),
                 len(obj_cloud), profile.total_time)
        site_plans.append(SitePlan(site.object_id, site.label, site.risk, stop_xy, traj,
                                   profile, sl, LinearProgram(dm.entries.T, targets[sl], lower)))

    speed = float(scene.config["chassis"]["speed"])
    travel = float(sum(length / speed for length in lengths))
    irradiation = float(sum(float(np.sum(s.profile.dwell)) for s in site_plans))
    return MissionPlan(policy, site_plans, paths, lengths, cloud, targets, travel, irradiation,
                       grid)


def accumulate_arm_dose(plan, assembly):
    """Dose on every surface point from every pose of every site (no occlusion)."""
    pos, nrm = plan.cloud.positions, plan.cloud.normals
    dose = np.zeros(len(pos))
    for site in plan.sites:
        for pose, dt in zip(site.trajectory.poses, site.profile.dwell):
            dose += accumulate_dose(irradiance_assembly(assembly.at(pose), pos, nrm), dt)
    return dose


# -- fixed stations --------------------------------------------------------
def tower_assembly(scene, xy):
    cfg = scene.config["station_assembly"]
    pose = Pose.look_along((float(xy[0]), float(xy[1]), float(cfg["height"])),
                           (1.0, 0.0, 0.0), (0.0, 0.0, 1.0))
    return LampAssembly(pose, cfg["radiant_flux"], cfg["length"], cfg["spacing"],
                        front_only=False)


def station_irradiance(scene, assembly, positions, normals, occlusion=True):
    """Tower irradiance (W/m^2), each lamp masked by its own line of sight."""
    inv = assembly.pose.inverse()
    p_l, n_l = inv.apply(positions), inv.apply_vector(normals)
    eps = float(scene.planning["occlusion_eps"])
    total = np.zeros(len(positions))
    for lamp, center in zip(assembly.lamps, assembly.lamp_centers_world()):
        E = irradiance_closed_form(lamp, p_l, n_l)
        if occlusion:
            E = E * visibility_mask(scene, center, positions, eps)
        total += E
    return total


def plan_station_mission(scene, clouds=None, grid=None):
    clouds = object_clouds(scene) if clouds is None else clouds
    grid = build_grid(scene) if grid is None else grid
    start = _start_cell(scene, grid)
    stations = [StationPlan(tuple(s["position"][:2]), float(s["duration"]))
                for s in scene.config["stations"]]
    if not stations:
        raise ValueError("FixedStation policy needs at least one entry in 'stations'")
    cells = [grid.world_to_cell(*s.position) for s in stations]
    paths, lengths = _chassis_paths(grid, start, cells,
                                    [f"station-{i}" for i in range(len(stations))])
    cloud = SurfaceCloud.concatenate(clouds, scene.name)
    targets = planning_targets(scene, cloud.risk, Policy.DIFFERENTIATED)
    speed = float(scene.config["chassis"]["speed"])
    travel = float(sum(length / speed for length in lengths))
    irradiation = float(sum(s.duration for s in stations))
    return MissionPlan(Policy.FIXED_STATION, stations, paths, lengths, cloud, targets, travel,
                       irradiation, grid)


def accumulate_station_dose(scene, plan):
    pos, nrm = plan.cloud.positions, plan.cloud.normals
    dose = np.zeros(len(pos))
    for station in plan.sites:
        E = station_irradiance(scene, tower_assembly(scene, station.position), pos, nrm)
        dose += accumulate_dose(E, station.duration)
    return dose


# -- missions --------------------------------------------------------------
def simulate(scene, policy, clouds=None, grid=None):
    """Plan and execute one mission; returns ``(plan, doses)``."""
    policy = Policy.parse(policy)
    if policy is Policy.FIXED_STATION:
        plan = plan_station_mission(scene, clouds, grid)
        dose = accumulate_station_dose(scene, plan)
    else:
        plan = plan_arm_mission(scene, policy, clouds, grid)
        dose = accumulate_arm_dose(plan, arm_assembly(scene))
    plan.cloud.dose = dose
    return plan, dose


def build_report(scene, plan, dose):
    registry = scene.registry()
    probe_risk = [int(registry[scene.object(p.object_id).label]) for p in scene.probes]
    hcr, ocr, readings = evaluate_probes(scene.probes, plan.cloud.positions, dose,
                                         plan.cloud.risk, probe_risk, scene.thresholds)
    base_targets = scene.targets if plan.policy is not Policy.UNIFORM_HIGH \
        else scene.targets.uniform()
    return MissionReport(
        policy=plan.policy.value,
        scene=scene.name,
        hcr=hcr,
        ocr=ocr,
        et=plan.travel_time + plan.irradiation_time,
        travel_time=plan.travel_time,
        irradiation_time=plan.irradiation_time,
        probes=readings,
        point_summary=summarize_points(dose, plan.cloud.risk, base_targets.for_risk(plan.cloud.risk)),
        thresholds=dict(scene.thresholds),
        seed=scene.seed,
    )


def run_mission(scene, policy, clouds=None, grid=None):
    """Simulate ``policy`` on ``scene`` and return ``(report, plan)``."""
    plan, dose = simulate(scene, policy, clouds, grid)
    return build_report(scene, plan, dose), plan


def compare_policies(scene, policies=None):
    """Run several policies on shared scan/grid products.

    Returns ``{policy value: (report, plan)}`` and the ET saving (percent) of
    Differentiated over UniformHigh, or ``None`` if either is missing.
    """
    if policies is None:
        policies = [Policy.DIFFERENTIATED, Policy.UNIFORM_HIGH]
        if scene.config["stations"]:
            policies.append(Policy.FIXED_STATION)
    clouds = object_clouds(scene)
    grid = build_grid(scene)
    results = {}
    for policy in map(Policy.parse, policies):
        results[policy.value] = run_mission(scene, policy, clouds, grid)
    savings = None
    d = results.get(Policy.DIFFERENTIATED.value)
    u = results.get(Policy.UNIFORM_HIGH.value)
    if d and u and u[0].et > 0:
        savings = 100.0 * (u[0].et - d[0].et) / u[0].et
    return results, savings


def savings_percent(et_uniform, et_diff):
    if not et_uniform > 0 or not math.isfinite(et_uniform):
        raise ValueError("uniform ET must be positive")
    return 100.0 * (et_uniform - et_diff) / et_uniform
