"""Irradiance of linear UV-C lamps on surface points.

Each lamp is a uniform line source of length ``L`` and radiant flux ``Phi``
lying on the lamp-frame x axis at height ``y_offset``.  Integrating the
inverse-square contribution of its elements from ``-L/2`` to ``L/2`` gives

    E = Phi / (4 pi L rho) * (atan((L/2 - x) / rho) + atan((L/2 + x) / rho)) * cos

with ``rho = sqrt((y - y')**2 + z**2)``.  The incidence factor ``cos`` is taken
once, from the surface point toward the lamp center, and clamped to [0, 1].
The midpoint-rule quadrature uses the same factor so it converges to the
closed form; ``exact=True`` switches it to a per-element cosine instead.

Internally irradiance is W/m^2 and dose is mJ/cm^2.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._validation import check_points
from .exceptions import DegenerateGeometry, NegativeDuration
from .geometry import Pose, SurfacePoint

W_M2_TO_MW_CM2 = 0.1
W_M2_TO_UW_CM2 = 100.0
# W/m^2 * s = J/m^2 = 0.1 mJ/cm^2
DOSE_DIVISOR = 10.0

_AXIS_EPS = 1e-12
# bound on floats held in memory by one quadrature chunk
_CHUNK_ELEMENTS = 4_000_000


def w_m2_to_mw_cm2(E):
    return np.asarray(E, dtype=float) * W_M2_TO_MW_CM2


def w_m2_to_uw_cm2(E):
    return np.asarray(E, dtype=float) * W_M2_TO_UW_CM2


def mw_cm2_to_w_m2(E):
    return np.asarray(E, dtype=float) / W_M2_TO_MW_CM2


@dataclass(frozen=True)
class Lamp:
    length: float
    radiant_flux: float
    y_offset: float = 0.0

    def __post_init__(self):
        if not self.length > 0:
            raise ValueError(f"lamp length must be positive, got {self.length}")
        if not self.radiant_flux > 0:
            raise ValueError(f"radiant flux must be positive, got {self.radiant_flux}")


@dataclass(frozen=True)
class LampAssembly:
    """Three parallel lamps at y = +d, 0, -d in the assembly frame.

    ``front_only`` models the reflector behind the lamps: points with
    lamp-frame ``z <= 0`` receive nothing.  A free-standing tower source sets
    it to False.
    """

    pose: Pose = field(default_factory=Pose)
    radiant_flux: float = 1.0
    length: float = 0.135
    spacing: float = 0.05
    front_only: bool = True

    def __post_init__(self):
        if not self.spacing > 0:
            raise ValueError(f"lamp spacing must be positive, got {self.spacing}")
        # validates flux and length
        Lamp(self.length, self.radiant_flux)

    @property
    def lamps(self):
        d = self.spacing
        return tuple(Lamp(self.length, self.radiant_flux, y) for y in (d, 0.0, -d))

    def at(self, pose):
        return LampAssembly(pose, self.radiant_flux, self.length, self.spacing, self.front_only)

    def lamp_centers_world(self):
        centers = np.array([[0.0, lamp.y_offset, 0.0] for lamp in self.lamps])
        return self.pose.apply(centers)


def _lamp_geometry(lamp, p, n):
    p = check_points(p, "p_lamp")
    n = check_points(n, "n_lamp")
    x, y, z = p[:, 0], p[:, 1] - lamp.y_offset, p[:, 2]
    rho = np.hypot(y, z)
    on_axis = rho < _AXIS_EPS
    if np.any(on_axis):
        idx = int(np.flatnonzero(on_axis)[0])
        raise DegenerateGeometry(f"point {p[idx].tolist()} lies on the lamp axis", index=idx)
    # unit vector from the surface point toward the lamp center (0, y', 0)
    to_center = -np.column_stack([x, y, z])
    r_hat = to_center / np.linalg.norm(to_center, axis=1, keepdims=True)
    cos = np.clip(np.einsum("ij,ij->i", r_hat, n), 0.0, 1.0)
    return x, y, z, rho, cos, n


def _maybe_scalar(values, like):
    return float(values[0]) if np.asarray(like).ndim == 1 else values


def irradiance_closed_form(lamp: Lamp, p_lamp, n_lamp):
    """Closed-form irradiance (W/m^2) of one lamp, inputs in the lamp frame."""
    x, _, _, rho, cos, _ = _lamp_geometry(lamp, p_lamp, n_lamp)
    half = 0.5 * lamp.length
    angular = np.arctan((half - x) / rho) + np.arctan((half + x) / rho)
    E = lamp.radiant_flux / (4.0 * np.pi * lamp.length * rho) * angular * cos
    return _maybe_scalar(E, p_lamp)


def segment_contributions(lamp: Lamp, p_lamp, n_lamp, n_segments, exact=False):
    """Per-element irradiance, shape (n_points, n_segments).

    Element ``k`` is the midpoint ``l_k = -L/2 + (k + 1/2) L / n`` treated as a
    point source of flux ``Phi / n``.
    """
    n_segments = int(n_segments)
    if n_segments < 1:
        raise ValueError("n_segments must be >= 1")
    x, y, z, _, cos, n = _lamp_geometry(lamp, p_lamp, n_lamp)
    h = lamp.length / n_segments
    ell = -0.5 * lamp.length + (np.arange(n_segments) + 0.5) * h
    dx = x[:, None] - ell[None, :]
    r2 = dx * dx + (y * y + z * z)[:, None]
    scale = lamp.radiant_flux / (4.0 * np.pi * lamp.length) * h
    if not exact:
        return scale / r2 * cos[:, None]
    # per-element incidence: direction from the point toward the element
    r = np.sqrt(r2)
    dot = (-dx * n[:, 0, None] - y[:, None] * n[:, 1, None] - z[:, None] * n[:, 2, None]) / r
    return scale / r2 * np.clip(dot, 0.0, 1.0)


def irradiance_quadrature(lamp: Lamp, p_lamp, n_lamp, n_segments, exact=False):
    """Midpoint-rule sum of the differential irradiance over the lamp (W/m^2)."""
    p = check_points(p_lamp, "p_lamp")
    n = check_points(n_lamp, "n_lamp")
    chunk = max(1, _CHUNK_ELEMENTS // max(int(n_segments), 1))
    out = np.empty(len(p))
    for start in range(0, len(p), chunk):
        sl = slice(start, start + chunk)
        try:
            contrib = segment_contributions(lamp, p[sl], n[sl], n_segments, exact=exact)
        except DegenerateGeometry as err:
            raise DegenerateGeometry(str(err), index=start + err.index) from None
        out[sl] = contrib.sum(axis=1)
    return _maybe_scalar(out, p_lamp)


def _surface_arrays(sp, normals):
    if isinstance(sp, SurfacePoint):
        return sp.position, sp.normal
    if normals is None:
        raise TypeError("normals are required when positions are given as arrays")
    return sp, normals


def irradiance_assembly(assembly: LampAssembly, sp, normals=None, method="closed_form",
                        n_segments=100_000):
    """Total irradiance (W/m^2) of the three lamps on world-frame surface point(s).

    ``sp`` is a :class:`SurfacePoint` or an array of positions accompanied by
    ``normals``.  ``method="quadrature"`` sums the per-lamp quadrature instead.
    """
    positions, normals = _surface_arrays(sp, normals)
    scalar = np.asarray(positions).ndim == 1
    inv = assembly.pose.inverse()
    p_l = inv.apply(check_points(positions, "positions"))
    n_l = inv.apply_vector(check_points(normals, "normals"))
    if method not in ("closed_form", "quadrature"):
        raise ValueError(f"unknown method {method!r}")
    total = np.zeros(len(p_l))
    # behind the reflector (z <= 0, which includes the lamp axes) stays dark
    lit = p_l[:, 2] > _AXIS_EPS if assembly.front_only else np.ones(len(p_l), dtype=bool)
    idx = np.flatnonzero(lit)
    if len(idx) == 0:
        return float(total[0]) if scalar else total
    for lamp in assembly.lamps:
        try:
            if method == "closed_form":
                total[idx] += irradiance_closed_form(lamp, p_l[idx], n_l[idx])
            else:
                total[idx] += irradiance_quadrature(lamp, p_l[idx], n_l[idx], n_segments)
        except DegenerateGeometry as err:
            raise DegenerateGeometry(str(err), index=int(idx[err.index])) from None
    return float(total[0]) if scalar else total


def accumulate_dose(E, dt):
    """Dose increment (mJ/cm^2) from irradiance ``E`` (W/m^2) held for ``dt`` s."""
    dt_arr = np.asarray(dt, dtype=float)
    if np.any(dt_arr < 0):
        raise NegativeDuration(f"exposure duration must be >= 0, got {dt}")
    dose = np.asarray(E, dtype=float) * dt_arr / DOSE_DIVISOR
    return float(dose) if dose.ndim == 0 else dose
