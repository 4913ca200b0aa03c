"""Label-to-risk registry for detected objects."""

from __future__ import annotations

import json
import re
from pathlib import Path

from ..geometry import RiskClass

DEFAULT_HOTSPOTS = (
    "armless office chair", "examination table", "side rail", "medical machine",
    "switch", "sink", "table", "door handle", "bed rail",
)
DEFAULT_NONHOTSPOTS = ("curtain", "wall")


def normalize_label(label):
    return re.sub(r"\s+", " ", re.sub(r"[_\-]", " ", str(label))).strip().lower()


class RiskRegistry:
    """Mapping from semantic label to :class:`RiskClass`; unknown labels are non-hotspot."""

    def __init__(self, mapping=None):
        self._map = {}
        for label, risk in (mapping or {}).items():
            self[label] = risk

    @classmethod
    def default(cls):
        mapping = {label: RiskClass.HOTSPOT for label in DEFAULT_HOTSPOTS}
        mapping.update({label: RiskClass.NON_HOTSPOT for label in DEFAULT_NONHOTSPOTS})
        return cls(mapping)

    @classmethod
    def from_json(cls, path, base=None):
        """Load ``{"label": "hotspot" | "nonhotspot"}``, layered over ``base``."""
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        registry = cls(dict(base.items())) if base is not None else cls()
        for label, risk in data.items():
            registry[label] = risk
        return registry

    def __setitem__(self, label, risk):
        self._map[normalize_label(label)] = RiskClass.parse(risk)

    def __getitem__(self, label):
        return self._map.get(normalize_label(label), RiskClass.NON_HOTSPOT)

    def __contains__(self, label):
        return normalize_label(label) in self._map

    def __len__(self):
        return len(self._map)

    def items(self):
        return sorted(self._map.items())

    def to_json(self):
        return {label: ("hotspot" if risk is RiskClass.HOTSPOT else "nonhotspot")
                for label, risk in self.items()}


def classify(labels, registry=None):
    registry = RiskRegistry.default() if registry is None else registry
    return [registry[label] for label in labels]
