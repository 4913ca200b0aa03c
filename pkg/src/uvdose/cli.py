"""Command-line front end: ``uvdose <command> [options]``.

Exit codes: 0 ok, 1 usage, 2 validation, 3 unreachable point, 4 no path.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import irradiance as irr
from .exceptions import NoFreeStopPoint, NoPath, OrphanProbe, UnreachablePoint, UVDoseError
from .geometry import Pose
from .lp import LinearProgram, write_lp_text
from .mapping.ply import write_ply
from .optimizer import write_dose_report_csv, write_speed_profile_csv
from .planner.grid import save_map
from .planner.risk import RiskRegistry
from .simulator.mission import Policy, build_report, compare_policies, simulate
from .simulator.report import MissionReport, render_table
from .simulator.scene import load_scene

EXIT_OK, EXIT_USAGE, EXIT_VALIDATION, EXIT_UNREACHABLE, EXIT_NO_PATH = 0, 1, 2, 3, 4

DEFAULT_POSITIONS = ((0.0, 0.0), (0.05, 0.0), (-0.05, 0.0), (0.0, 0.05), (0.0, -0.05))
DEFAULT_HEIGHTS = (0.2, 0.3, 0.4)
VALIDATION_TOL = 1e-6

log = logging.getLogger("uvdose")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _configure_logging():
    level = os.environ.get("UVDOSE_LOG", "WARNING").strip().upper()
    if level.isdigit():
        level = {0: "WARNING", 1: "INFO"}.get(int(level), "DEBUG")
    if level not in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
        level = "WARNING"
    logging.basicConfig(level=level, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")


def _parse_value(text):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def parse_overrides(items):
    out = {}
    for item in items or []:
        key, sep, value = item.partition("=")
        if not sep or not key:
            raise UsageError(f"--set expects key=value, got {item!r}")
        out[key.strip()] = _parse_value(value.strip())
    return out


def _load(args):
    if not args.scene:
        raise UsageError("--scene is required")
    overrides = parse_overrides(args.set)
    if args.seed is not None:
        overrides["seed"] = args.seed
    try:
        scene = load_scene(args.scene, overrides)
    except FileNotFoundError as err:
        raise UsageError(str(err)) from None
    if getattr(args, "registry", None):
        reg = RiskRegistry.from_json(args.registry, base=RiskRegistry())
        for label, risk in reg.items():
            scene.config["registry"][label] = risk.name.lower()
    return scene


def _out_dir(args):
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_json(path, data):
    Path(path).write_text(json.dumps(data, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _echo_config(out, scene):
    _write_json(out / "effective_config.json", scene.to_dict())


# -- commands --------------------------------------------------------------
def parse_positions(text):
    pts = []
    for chunk in text.split(";"):
        if chunk.strip():
            x, y = (float(v) for v in chunk.split(","))
            pts.append((x, y))
    if not pts:
        raise UsageError("--positions needs at least one x,y pair")
    return tuple(pts)


def irradiance_sweep(assembly, positions=DEFAULT_POSITIONS, heights=DEFAULT_HEIGHTS,
                     n_segments=100_000):
    """Rows of (x, y, z, closed form, quadrature, relative error), irradiance in uW/cm^2.

    The sensor faces the assembly, i.e. its normal is -z in the lamp frame.
    """
    rows = []
    for z in heights:
        for x, y in positions:
            p = np.array([x, y, z])
            n = np.array([0.0, 0.0, -1.0])
            closed = irr.irradiance_assembly(assembly, p, n)
            quad = irr.irradiance_assembly(assembly, p, n, method="quadrature",
                                           n_segments=n_segments)
            rel = abs(closed - quad) / abs(quad) if quad else abs(closed - quad)
            rows.append((x, y, z, irr.w_m2_to_uw_cm2(closed), irr.w_m2_to_uw_cm2(quad), rel))
    return rows


def cmd_validate_irradiance(args):
    cfg = {"radiant_flux": 1.0, "length": 0.135, "spacing": 0.05}
    if args.scene:
        cfg.update(_load(args).config["assembly"])
    else:
        for key, value in parse_overrides(args.set).items():
            cfg[key.split(".")[-1]] = value
    assembly = irr.LampAssembly(Pose.identity(), float(cfg["radiant_flux"]),
                                float(cfg["length"]), float(cfg["spacing"]))
    positions = parse_positions(args.positions) if args.positions else DEFAULT_POSITIONS
    rows = irradiance_sweep(assembly, positions, DEFAULT_HEIGHTS, args.segments)
    print(f"{'x_m':>7}{'y_m':>7}{'z_m':>6}{'closed_uW_cm2':>16}{'quad_uW_cm2':>16}{'rel_err':>11}")
    for x, y, z, c, q, e in rows:
        print(f"{x:7.3f}{y:7.3f}{z:6.2f}{c:16.6f}{q:16.6f}{e:11.2e}")
    worst = max(r[5] for r in rows)
    ok = worst <= VALIDATION_TOL
    print(f"max relative error {worst:.3e} ({'ok' if ok else 'FAIL'}, tolerance {VALIDATION_TOL:g})")
    if args.out:
        out = _out_dir(args)
        with (out / "irradiance_validation.csv").open("w", encoding="utf-8") as fh:
            fh.write("x_m,y_m,z_m,closed_uW_cm2,quadrature_uW_cm2,rel_error\n")
            for row in rows:
                fh.write(",".join(repr(float(v)) for v in row) + "\n")
    return EXIT_OK if ok else EXIT_VALIDATION


def _write_plan(out, scene, plan, write_lp=False):
    _write_json(out / "mission_plan.json", plan.to_dict())
    for site in plan.sites:
        if hasattr(site, "profile"):
            write_speed_profile_csv(out / f"speed_profile_{site.object_id}.csv", site.profile)
            if write_lp and site.lp is not None:
                write_lp_text(site.lp, out / f"lp_{site.object_id}.txt")
    write_dose_report_csv(out / "dose_report.csv", plan.cloud.positions, plan.cloud.risk,
                          plan.cloud.dose, plan.targets)
    write_ply(out / "dose.ply", plan.cloud, comment=f"scene {scene.name} policy {plan.policy.value}")
    if plan.grid is not None:
        save_map(plan.grid, out / "grid.yaml")


def cmd_plan(args):
    scene = _load(args)
    out = _out_dir(args)
    _echo_config(out, scene)
    policy = Policy.parse(args.policy or "diff")
    plan, dose = simulate(scene, policy)
    _write_plan(out, scene, plan, write_lp=args.write_lp)
    short = int(np.sum(dose < plan.targets))
    if short:
        print(f"{short} surface points below their planning target", file=sys.stderr)
        return EXIT_VALIDATION
    print(f"plan written to {out} ({len(plan.sites)} sites, {len(dose)} points)")
    return EXIT_OK


def cmd_simulate(args):
    scene = _load(args)
    out = _out_dir(args)
    _echo_config(out, scene)
    plan, dose = simulate(scene, Policy.parse(args.policy or "diff"))
    report = build_report(scene, plan, dose)
    (out / "report.json").write_text(report.to_json(), encoding="utf-8")
    table = render_table([report])
    (out / "report.txt").write_text(table, encoding="utf-8")
    write_ply(out / "dose.ply", plan.cloud, comment=f"scene {scene.name} policy {plan.policy.value}")
    print(table, end="")
    return EXIT_OK


def compare_document(scene, results, savings):
    return {
        "scene": scene.name,
        "seed": scene.seed,
        "savings_percent": savings,
        "reports": {name: report.to_dict() for name, (report, _) in results.items()},
    }


def write_comparison(out, scene, results, savings):
    """Write compare.json and compare.txt; returns the table text."""
    out = Path(out)
    _write_json(out / "compare.json", compare_document(scene, results, savings))
    table = render_table([r for r, _ in results.values()], savings)
    (out / "compare.txt").write_text(table, encoding="utf-8")
    return table


def cmd_compare(args):
    scene = _load(args)
    out = _out_dir(args)
    _echo_config(out, scene)
    results, savings = compare_policies(scene)
    print(write_comparison(out, scene, results, savings), end="")
    return EXIT_OK


def cmd_report(args):
    if args.input:
        path = Path(args.input)
    elif args.out:
        base = Path(args.out)
        path = base / "compare.json" if (base / "compare.json").exists() else base / "report.json"
    else:
        raise UsageError("report needs --out DIR or --input FILE")
    if not path.exists():
        raise UsageError(f"no report found at {path}")
    data = json.loads(path.read_text(encoding="utf-8"))
    if "reports" in data:
        reports = [MissionReport.from_dict(r) for r in data["reports"].values()]
        print(render_table(reports, data.get("savings_percent")), end="")
    else:
        print(render_table([MissionReport.from_dict(data)]), end="")
    return EXIT_OK


# -- entry point -----------------------------------------------------------
def build_parser():
    parser = _Parser(prog="uvdose", description="UV-C dose planning and mission simulation")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    def common(p, policy=False):
        p.add_argument("--scene", help="scene JSON file or bundled name (ward, clinic)")
        p.add_argument("--out", default="uvdose-out", help="output directory")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                       help="override a scene/config value, e.g. targets.hotspot_min=30")
        p.add_argument("--registry", help="risk registry JSON (label -> hotspot/nonhotspot)")
        if policy:
            p.add_argument("--policy", choices=["diff", "uniform", "station"], default="diff")

    p = sub.add_parser("validate-irradiance", help="closed form vs quadrature sweep")
    common(p)
    p.set_defaults(out=None)
    p.add_argument("--segments", type=int, default=100_000)
    p.add_argument("--positions", help="sensor x,y pairs in meters, e.g. '0,0;0.05,0'")
    p.set_defaults(func=cmd_validate_irradiance)

    p = sub.add_parser("plan", help="plan a mission and write plan, CSV and PLY files")
    common(p, policy=True)
    p.add_argument("--write-lp", action="store_true", help="also write each site's LP")
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("simulate", help="simulate one policy and write a MissionReport")
    common(p, policy=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("compare", help="compare Differentiated, UniformHigh and FixedStation")
    common(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("report", help="render a saved report or comparison as a table")
    p.add_argument("--out", help="directory holding report.json or compare.json")
    p.add_argument("--input", help="report or comparison JSON file")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None):
    _configure_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not getattr(args, "command", None):
            raise UsageError("a command is required")
        if args.command != "report" and args.command != "validate-irradiance" and not args.scene:
            raise UsageError("--scene is required")
        return args.func(args)
    except UsageError as err:
        print(f"usage error: {err}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    except UnreachablePoint as err:
        print(f"unreachable point: {err}", file=sys.stderr)
        return EXIT_UNREACHABLE
    except (NoPath, NoFreeStopPoint) as err:
        print(f"no path: {err}", file=sys.stderr)
        return EXIT_NO_PATH
    except (OrphanProbe, ValueError, KeyError, UVDoseError) as err:
        print(f"validation error: {err}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
