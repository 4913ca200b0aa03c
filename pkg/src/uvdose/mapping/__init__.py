"""Occupancy mapping, surface clouds and standoff scan trajectories."""

from .octree import OccupancyOctree, probability
from .ply import read_ply, write_ply
from .surface import (NormalEstimator, StatisticalOutlierFilter, SurfaceCloud,
                      estimate_normals, extract_surface, statistical_outlier_mask,
                      voxel_downsample)
from .trajectory import (BoxReachability, ScanTrajectory, always_reachable,
                         generate_scan_trajectory, standoff_distances)

__all__ = [
    "BoxReachability", "NormalEstimator", "OccupancyOctree", "ScanTrajectory",
    "StatisticalOutlierFilter", "SurfaceCloud", "always_reachable", "estimate_normals",
    "extract_surface", "generate_scan_trajectory", "probability", "read_ply",
    "standoff_distances", "statistical_outlier_mask", "voxel_downsample", "write_ply",
]
