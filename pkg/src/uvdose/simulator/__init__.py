"""Scene description, virtual scanning and end-to-end mission simulation."""

from .mission import (ArmReach, MissionPlan, Policy, SitePlan, StationPlan, build_grid,
                      build_report, compare_policies, object_clouds, run_mission,
                      savings_percent, simulate)
from .primitives import Box, Cylinder, PlanePatch, primitive_from_dict
from .report import (MissionReport, ProbeReading, coverage_rates, evaluate_probes,
                     format_mmss, render_table, snap_probes)
from .scan import ray_occluded, synthesize_scan, visibility_mask
from .scene import Probe, Scene, SceneObject, load_scene

__all__ = [
    "ArmReach", "Box", "Cylinder", "MissionPlan", "MissionReport", "PlanePatch", "Policy",
    "Probe", "ProbeReading", "Scene", "SceneObject", "SitePlan", "StationPlan", "build_grid",
    "build_report", "compare_policies", "coverage_rates", "evaluate_probes", "format_mmss",
    "load_scene", "object_clouds", "primitive_from_dict", "ray_occluded", "render_table",
    "run_mission", "savings_percent", "simulate", "snap_probes", "synthesize_scan",
    "visibility_mask",
]
