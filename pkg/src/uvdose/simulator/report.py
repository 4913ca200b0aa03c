"""Probe evaluation and mission reports (JSON + text table)."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from ..exceptions import OrphanProbe
from ..geometry import RiskClass

SNAP_TOLERANCE = 0.01


@dataclass(frozen=True)
class ProbeReading:
    id: str
    object_id: str
    risk: str
    dose: float
    point_index: int
    snap_distance: float
    saturated: bool


@dataclass
class MissionReport:
    policy: str
    scene: str
    hcr: float | None
    ocr: float | None
    et: float
    travel_time: float
    irradiation_time: float
    probes: list = field(default_factory=list)
    point_summary: dict = field(default_factory=dict)
    thresholds: dict = field(default_factory=dict)
    seed: int = 0

    def to_dict(self):
        data = asdict(self)
        data["et_mmss"] = format_mmss(self.et)
        return data

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, data):
        data = {k: v for k, v in data.items() if k != "et_mmss"}
        data["probes"] = [ProbeReading(**p) for p in data.get("probes", [])]
        return cls(**data)


def format_mmss(seconds):
    """``mm:ss`` with whole seconds; minutes may exceed 59."""
    total = int(round(float(seconds)))
    return f"{total // 60:02d}:{total % 60:02d}"


def format_rate(value):
    return "N/A" if value is None else f"{100.0 * value:.1f}%"


def snap_probes(probes, positions, tolerance=SNAP_TOLERANCE):
    """Nearest surface-point index for each probe; OrphanProbe beyond ``tolerance``."""
    if len(probes) == 0:
        return np.empty(0, dtype=np.intp), np.empty(0)
    if len(positions) == 0:
        raise OrphanProbe(probes[0].id, math.inf)
    dist, idx = cKDTree(positions).query(np.array([p.position for p in probes], dtype=float))
    for probe, d in zip(probes, dist):
        if d > tolerance + 1e-12:
            raise OrphanProbe(probe.id, float(d))
    return np.asarray(idx, dtype=np.intp), np.asarray(dist, dtype=float)


def coverage_rates(doses, risks, hotspot_threshold=25.0, overall_threshold=5.0):
    """(HCR, OCR); a rate with an empty denominator is ``None``."""
    doses = np.asarray(doses, dtype=float)
    risks = np.asarray(risks, dtype=int)
    hot = risks == int(RiskClass.HOTSPOT)
    hcr = float(np.mean(doses[hot] >= hotspot_threshold)) if np.any(hot) else None
    ocr = float(np.mean(doses >= overall_threshold)) if len(doses) else None
    return hcr, ocr


def evaluate_probes(probes, positions, doses, risks, probe_risks, thresholds):
    """Snap probes to surface points and compute HCR / OCR.

    ``probe_risks`` gives the class of each probe (that of its object).
    Returns ``(hcr, ocr, readings)``.
    """
    idx, dist = snap_probes(probes, positions)
    doses = np.asarray(doses, dtype=float)
    probe_dose = doses[idx] if len(idx) else np.empty(0)
    hcr, ocr = coverage_rates(probe_dose, probe_risks, thresholds["hotspot"],
                              thresholds["overall"])
    readings = [
        ProbeReading(p.id, p.object_id, RiskClass(int(r)).name.lower(), float(d), int(i),
                     float(s), bool(d > thresholds["saturation"]))
        for p, r, d, i, s in zip(probes, probe_risks, probe_dose, idx, dist)
    ]
    return hcr, ocr, readings


def summarize_points(doses, risks, targets=None):
    """Min / mean dose per risk class, plus violations of ``targets`` when given."""
    doses = np.asarray(doses, dtype=float)
    risks = np.asarray(risks, dtype=int)
    out = {}
    for cls in RiskClass:
        mask = risks == int(cls)
        entry = {"count": int(mask.sum())}
        if np.any(mask):
            entry["min"] = float(doses[mask].min())
            entry["mean"] = float(doses[mask].mean())
            if targets is not None:
                entry["violations"] = int(np.sum(doses[mask] < np.asarray(targets)[mask]))
        out[cls.name.lower()] = entry
    return out


def render_table(reports, savings=None):
    """Plain-text table with HCR, OCR and ET (mm:ss) per policy."""
    header = f"{'Policy':<16}{'HCR':>8}{'OCR':>8}{'ET':>9}{'Travel':>9}{'Irrad.':>9}"
    lines = [header, "-" * len(header)]
    for r in reports:
        lines.append(f"{r.policy:<16}{format_rate(r.hcr):>8}{format_rate(r.ocr):>8}"
                     f"{format_mmss(r.et):>9}{format_mmss(r.travel_time):>9}"
                     f"{format_mmss(r.irradiation_time):>9}")
    if savings is not None:
        lines.append("")
        lines.append(f"ET savings, Differentiated vs UniformHigh: {savings:.1f}%")
    saturated = [(r.policy, p.id) for r in reports for p in r.probes if p.saturated]
    if saturated:
        lines.append("Saturated probes (> 100 mJ/cm^2): "
                     + ", ".join(f"{pol}:{pid}" for pol, pid in saturated))
    return "\n".join(lines) + "\n"
