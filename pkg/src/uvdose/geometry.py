"""Rigid transforms and the spatial value types used across the pipeline.

Conventions: right-handed frames, lengths in meters, rotations stored as unit
quaternions ``(w, x, y, z)``.  The lamp-local frame has x along the lamp axis,
y across the three lamps and z pointing from the assembly toward the scene.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.transform import Rotation

_QUAT_TOL = 1e-9


def normalize(v):
    """Return ``v`` scaled to unit length (row-wise for 2-D input)."""
    v = np.asarray(v, dtype=float)
    n = np.linalg.norm(v, axis=-1, keepdims=True)
    if np.any(n == 0):
        raise ValueError("cannot normalize a zero vector")
    return v / n


def quat_multiply(q1, q2):
    w1, x1, y1, z1 = q1
    w2, x2, y2, z2 = q2
    return np.array([
        w1 * w2 - x1 * x2 - y1 * y2 - z1 * z2,
        w1 * x2 + x1 * w2 + y1 * z2 - z1 * y2,
        w1 * y2 - x1 * z2 + y1 * w2 + z1 * x2,
        w1 * z2 + x1 * y2 - y1 * x2 + z1 * w2,
    ])


def quat_to_matrix(q):
    w, x, y, z = q
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
        [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
        [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
    ])


@dataclass(frozen=True)
class Pose:
    """Rigid transform mapping local coordinates into the parent frame."""

    translation: np.ndarray = field(default_factory=lambda: np.zeros(3))
    rotation: np.ndarray = field(default_factory=lambda: np.array([1.0, 0.0, 0.0, 0.0]))

    def __post_init__(self):
        t = np.asarray(self.translation, dtype=float).reshape(3)
        q = np.asarray(self.rotation, dtype=float).reshape(4)
        if not (np.all(np.isfinite(t)) and np.all(np.isfinite(q))):
            raise ValueError("pose components must be finite")
        norm = np.linalg.norm(q)
        if norm == 0:
            raise ValueError("rotation quaternion must be non-zero")
        q = q / norm
        t.setflags(write=False)
        q.setflags(write=False)
        object.__setattr__(self, "translation", t)
        object.__setattr__(self, "rotation", q)

    @classmethod
    def identity(cls):
        return cls()

    @classmethod
    def from_translation(cls, t):
        return cls(translation=np.asarray(t, dtype=float))

    @classmethod
    def from_axis_angle(cls, axis, angle, translation=(0.0, 0.0, 0.0)):
        axis = normalize(axis)
        half = 0.5 * angle
        q = np.concatenate([[np.cos(half)], np.sin(half) * axis])
        return cls(translation=np.asarray(translation, dtype=float), rotation=q)

    @classmethod
    def from_matrix(cls, R, translation=(0.0, 0.0, 0.0)):
        q = Rotation.from_matrix(np.asarray(R, dtype=float)).as_quat(scalar_first=True)
        return cls(translation=np.asarray(translation, dtype=float), rotation=q)

    @classmethod
    def look_along(cls, position, z_axis, x_hint):
        """Pose at ``position`` whose local z points along ``z_axis``.

        The local x axis is ``x_hint`` projected onto the plane orthogonal to z.
        When the hint is (nearly) parallel to z another world axis is used.
        """
        z = normalize(z_axis)
        x = np.asarray(x_hint, dtype=float) - np.dot(x_hint, z) * z
        if np.linalg.norm(x) < 1e-8:
            for alt in np.eye(3):
                x = alt - np.dot(alt, z) * z
                if np.linalg.norm(x) > 1e-3:
                    break
        x = normalize(x)
        y = np.cross(z, x)
        return cls.from_matrix(np.column_stack([x, y, z]), translation=position)

    @property
    def matrix(self):
        return quat_to_matrix(self.rotation)

    def as_homogeneous(self):
        T = np.eye(4)
        T[:3, :3] = self.matrix
        T[:3, 3] = self.translation
        return T

    def apply(self, points):
        """Transform points of shape (3,) or (n, 3)."""
        p = np.asarray(points, dtype=float)
        return p @ self.matrix.T + self.translation

    def apply_vector(self, vectors):
        """Rotate free vectors (no translation)."""
        return np.asarray(vectors, dtype=float) @ self.matrix.T

    def inverse(self):
        w, x, y, z = self.rotation
        q_inv = np.array([w, -x, -y, -z])
        t_inv = -(quat_to_matrix(q_inv) @ self.translation)
        return Pose(translation=t_inv, rotation=q_inv)

    def compose(self, other):
        """``self * other``: apply ``other`` first, then ``self``."""
        q = quat_multiply(self.rotation, other.rotation)
        t = self.apply(other.translation)
        return Pose(translation=t, rotation=q)

    def __matmul__(self, other):
        return self.compose(other)

    def is_valid(self):
        return abs(np.linalg.norm(self.rotation) - 1.0) <= _QUAT_TOL

    def to_dict(self):
        return {"translation": self.translation.tolist(), "rotation": self.rotation.tolist()}


def transform_point(pose: Pose, p) -> np.ndarray:
    return pose.apply(p)


def world_to_lamp_frame(assembly_pose: Pose, p) -> np.ndarray:
    """Express world point(s) ``p`` in the lamp-local frame of an assembly."""
    return assembly_pose.inverse().apply(p)


def lamp_to_world_frame(assembly_pose: Pose, p) -> np.ndarray:
    return assembly_pose.apply(p)


class RiskClass(enum.IntEnum):
    NON_HOTSPOT = 0
    HOTSPOT = 1

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        if isinstance(value, (int, np.integer)):
            return cls(int(value))
        key = str(value).strip().lower().replace("-", "").replace("_", "").replace(" ", "")
        if key == "hotspot":
            return cls.HOTSPOT
        if key == "nonhotspot":
            return cls.NON_HOTSPOT
        raise ValueError(f"unknown risk class {value!r}")


@dataclass(frozen=True)
class SurfacePoint:
    position: np.ndarray
    normal: np.ndarray
    risk: RiskClass = RiskClass.NON_HOTSPOT
    dose: float = 0.0

    def __post_init__(self):
        p = np.asarray(self.position, dtype=float).reshape(3)
        if not np.all(np.isfinite(p)):
            raise ValueError("position must be finite")
        n = normalize(np.asarray(self.normal, dtype=float).reshape(3))
        if self.dose < 0:
            raise ValueError("dose must be non-negative")
        object.__setattr__(self, "position", p)
        object.__setattr__(self, "normal", n)
        object.__setattr__(self, "risk", RiskClass.parse(self.risk))

    def with_dose(self, increment):
        if increment < 0:
            raise ValueError("dose increments must be non-negative")
        return SurfacePoint(self.position, self.normal, self.risk, self.dose + increment)
