"""Declarative scene description loaded from JSON."""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from ..optimizer import DoseTargets
from ..planner.risk import RiskRegistry
from .primitives import primitive_from_dict, primitive_to_dict

PROBE_TOLERANCE = 0.01

DEFAULTS = {
    "seed": 0,
    "assembly": {"radiant_flux": 1.0, "length": 0.135, "spacing": 0.05},
    "targets": {"hotspot_min": 22.0, "nonhotspot_min": 5.0},
    "thresholds": {"hotspot": 25.0, "overall": 5.0, "saturation": 100.0},
    "chassis": {"start": [0.5, 0.5], "speed": 0.3, "inflation": 0.3},
    "planning": {
        "standoff": 0.3,
        "v_max": 0.25,
        "floor": 0.1,
        "stop_distance": 0.6,
        "stop_clearance": 0.4,
        "reach": [3.0, 3.0, 0.05, 2.0],
        "grid_resolution": 0.05,
        "octree_resolution": 0.02,
        "normal_k": 12,
        "outlier_k": 8,
        "outlier_alpha": 1.0,
        "line_spacing": None,
        "max_constraints": 2000,
        "plan_to_thresholds": True,
        "min_patch_points": 10,
        "occlusion_eps": 0.03,
    },
    "station_assembly": {"radiant_flux": 4.0, "length": 0.9, "spacing": 0.04, "height": 1.0},
    "stations": [],
    "registry": {},
}


def deep_merge(base, override):
    out = copy.deepcopy(base)
    for key, value in (override or {}).items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = deep_merge(out[key], value)
        else:
            out[key] = copy.deepcopy(value)
    return out


def apply_override(config, dotted_key, value):
    """Set ``config["a"]["b"] = value`` for ``dotted_key == "a.b"`` (in place)."""
    keys = dotted_key.split(".")
    node = config
    for key in keys[:-1]:
        node = node.setdefault(key, {})
    node[keys[-1]] = value
    return config


@dataclass(frozen=True)
class SceneObject:
    id: str
    label: str
    primitive: object


@dataclass(frozen=True)
class Probe:
    id: str
    position: tuple
    object_id: str


@dataclass(frozen=True)
class Station:
    position: tuple
    duration: float


@dataclass
class Scene:
    name: str
    room: tuple
    objects: list
    obstacles: list = field(default_factory=list)
    probes: list = field(default_factory=list)
    config: dict = field(default_factory=lambda: copy.deepcopy(DEFAULTS))

    @classmethod
    def from_dict(cls, data, validate=True):
        config = deep_merge(DEFAULTS, {k: v for k, v in data.items()
                                       if k not in ("name", "room", "objects", "obstacles", "probes")})
        scene = cls(
            name=data.get("name", "scene"),
            room=tuple(float(v) for v in data["room"]["size"]),
            objects=[SceneObject(str(o["id"]), o["label"], primitive_from_dict(o["shape"]))
                     for o in data.get("objects", [])],
            obstacles=[primitive_from_dict(o.get("shape", o)) for o in data.get("obstacles", [])],
            probes=[Probe(str(p["id"]), tuple(float(v) for v in p["position"]), str(p["object"]))
                    for p in data.get("probes", [])],
            config=config,
        )
        if validate:
            scene.validate()
        return scene

    @classmethod
    def load(cls, path, overrides=None):
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        for key, value in (overrides or {}).items():
            apply_override(data, key, value)
        return cls.from_dict(data)

    def to_dict(self):
        data = {"name": self.name, "room": {"size": list(self.room)}}
        data.update(copy.deepcopy(self.config))
        data["objects"] = [{"id": o.id, "label": o.label, "shape": primitive_to_dict(o.primitive)}
                           for o in self.objects]
        data["obstacles"] = [{"shape": primitive_to_dict(p)} for p in self.obstacles]
        data["probes"] = [{"id": p.id, "position": list(p.position), "object": p.object_id}
                          for p in self.probes]
        return data

    def validate(self):
        room = np.asarray(self.room)
        ids = [o.id for o in self.objects]
        if len(set(ids)) != len(ids):
            raise ValueError("object ids must be unique")
        for obj in self.objects + [SceneObject("obstacle", "", p) for p in self.obstacles]:
            lo, hi = obj.primitive.bounds()
            if np.any(lo < -1e-9) or np.any(hi > room + 1e-9):
                raise ValueError(f"object {obj.id!r} extends outside the room")
        by_id = {o.id: o for o in self.objects}
        for probe in self.probes:
            if probe.object_id not in by_id:
                raise ValueError(f"probe {probe.id!r} refers to unknown object {probe.object_id!r}")
            d = float(by_id[probe.object_id].primitive.distance_to_surface(probe.position)[0])
            if d > PROBE_TOLERANCE:
                raise ValueError(f"probe {probe.id!r} is {d:.4f} m off its object's surface")
        DoseTargets(**self.config["targets"])
        return self

    # -- convenience accessors --------------------------------------------
    @property
    def seed(self):
        return int(self.config["seed"])

    @property
    def planning(self):
        return self.config["planning"]

    @property
    def targets(self):
        return DoseTargets(**self.config["targets"])

    @property
    def thresholds(self):
        return self.config["thresholds"]

    @property
    def primitives(self):
        return [o.primitive for o in self.objects] + list(self.obstacles)

    def registry(self):
        registry = RiskRegistry.default()
        for label, risk in self.config.get("registry", {}).items():
            registry[label] = risk
        return registry

    def object(self, object_id):
        for obj in self.objects:
            if obj.id == object_id:
                return obj
        raise KeyError(object_id)


BUILTIN_SCENES = ("ward", "clinic")


def builtin_scene_path(name):
    return resources.files("uvdose.scenes").joinpath(f"{name}.json")


def load_scene(path_or_name, overrides=None):
    """Load a scene file, or a bundled scene by name (``ward``, ``clinic``)."""
    path = Path(path_or_name)
    if not path.exists() and str(path_or_name) in BUILTIN_SCENES:
        path = builtin_scene_path(str(path_or_name))
    if not Path(path).exists():
        raise FileNotFoundError(f"scene file {path_or_name} not found")
    return Scene.load(path, overrides)
