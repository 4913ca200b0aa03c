"""Dose planning and mission simulation for robotic UV-C disinfection."""

from .exceptions import (DegenerateGeometry, NoPath, OrphanProbe, UnreachablePoint,
                         UVDoseError)
from .geometry import Pose, RiskClass, SurfacePoint, transform_point, world_to_lamp_frame
from .irradiance import (Lamp, LampAssembly, accumulate_dose, irradiance_assembly,
                         irradiance_closed_form, irradiance_quadrature)
from .lp import LinearProgram, LpStatus, solve, vertex_oracle
from .optimizer import DoseMatrix, DoseTargets, DwellTimeOptimizer, optimize_dwell

__version__ = "0.1.0"

__all__ = [
    "DegenerateGeometry", "DoseMatrix", "DoseTargets", "DwellTimeOptimizer", "Lamp",
    "LampAssembly", "LinearProgram", "LpStatus", "NoPath", "OrphanProbe", "Pose", "RiskClass",
    "SurfacePoint", "UVDoseError", "UnreachablePoint", "accumulate_dose", "irradiance_assembly",
    "irradiance_closed_form", "irradiance_quadrature", "optimize_dwell", "solve",
    "transform_point", "vertex_oracle", "world_to_lamp_frame",
]
