import json

import numpy as np
import pytest
from conftest import single_object_scene

from uvdose import cli
from uvdose import irradiance as irr
from uvdose.cli import (EXIT_NO_PATH, EXIT_OK, EXIT_UNREACHABLE, EXIT_USAGE, EXIT_VALIDATION,
                        main, parse_overrides)
from uvdose.lp import read_lp_text
from uvdose.mapping import read_ply
from uvdose.planner import load_map


def write_scene(tmp_path, data=None, name="scene.json"):
    data = single_object_scene().to_dict() if data is None else data
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return str(path)


# -- validate-irradiance ---------------------------------------------------------------
def test_validate_irradiance_ok(capsys, tmp_path):
    assert main(["validate-irradiance", "--out", str(tmp_path)]) == EXIT_OK
    out = capsys.readouterr().out.splitlines()
    rows = [line for line in out[1:] if not line.startswith("max")]
    assert len(rows) == 15
    assert "ok" in out[-1]
    csv_rows = (tmp_path / "irradiance_validation.csv").read_text().splitlines()
    assert len(csv_rows) == 16
    assert max(float(r.split(",")[-1]) for r in csv_rows[1:]) <= 1e-6


def test_validate_irradiance_corrupted_closed_form(monkeypatch, capsys):
    real = irr.irradiance_closed_form
    monkeypatch.setattr(irr, "irradiance_closed_form", lambda *a: 1.01 * real(*a))
    assert main(["validate-irradiance"]) == EXIT_VALIDATION
    assert "FAIL" in capsys.readouterr().out


def test_validate_irradiance_coarse_quadrature(capsys):
    assert main(["validate-irradiance", "--segments", "10"]) != EXIT_OK


def test_validate_irradiance_positions_and_set(capsys):
    code = main(["validate-irradiance", "--positions", "0,0;0.02,0.01",
                 "--set", "assembly.radiant_flux=2.5"])
    assert code == EXIT_OK
    assert len(capsys.readouterr().out.splitlines()) == 1 + 6 + 1


# -- usage errors -----------------------------------------------------------------------
@pytest.mark.parametrize("argv", [
    [],
    ["frobnicate"],
    ["plan"],
    ["plan", "--scene", "/nonexistent/scene.json"],
    ["plan", "--scene", "ward", "--policy", "tower"],
    ["plan", "--scene", "ward", "--set", "novalue"],
    ["report"],
])
def test_usage_errors(argv, capsys, tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    assert main(argv) == EXIT_USAGE
    assert "usage" in capsys.readouterr().err


def test_parse_overrides():
    assert parse_overrides(["a.b=3", "c=hello", "d=[1, 2]", "e=true"]) == {
        "a.b": 3, "c": "hello", "d": [1, 2], "e": True}


def test_log_env(monkeypatch):
    monkeypatch.setenv("UVDOSE_LOG", "debug")
    cli._configure_logging()
    monkeypatch.setenv("UVDOSE_LOG", "2")
    cli._configure_logging()


# -- plan / simulate / compare / report ----------------------------------------------------
def test_plan_writes_files(tmp_path, capsys):
    out = tmp_path / "out"
    code = main(["plan", "--scene", write_scene(tmp_path), "--out", str(out), "--write-lp",
                 "--seed", "3"])
    assert code == EXIT_OK
    names = {p.name for p in out.iterdir()}
    for expected in ("effective_config.json", "mission_plan.json", "speed_profile_t.csv",
                     "dose_report.csv", "dose.ply", "grid.yaml", "grid.pgm", "lp_t.txt"):
        assert expected in names
    assert json.loads((out / "effective_config.json").read_text())["seed"] == 3
    plan = json.loads((out / "mission_plan.json").read_text())
    assert plan["order"] == ["t"] and plan["policy"] == "Differentiated"
    cloud = read_ply(out / "dose.ply")
    assert len(cloud) == plan["n_points"] and np.all(cloud.dose > 0)
    lp = read_lp_text(out / "lp_t.txt")
    assert lp.A.shape[0] == len(cloud)
    assert load_map(out / "grid.yaml").resolution == 0.05


def test_set_override_reaches_pipeline(tmp_path):
    out = tmp_path / "out"
    assert main(["plan", "--scene", write_scene(tmp_path), "--out", str(out),
                 "--set", "planning.standoff=0.35"]) == EXIT_OK
    assert json.loads((out / "effective_config.json").read_text())["planning"]["standoff"] == 0.35


def test_simulate_and_report(tmp_path, capsys):
    out = tmp_path / "sim"
    assert main(["simulate", "--scene", write_scene(tmp_path), "--policy", "uniform",
                 "--out", str(out)]) == EXIT_OK
    report = json.loads((out / "report.json").read_text())
    assert report["policy"] == "UniformHigh" and report["hcr"] == 1.0
    assert ":" in report["et_mmss"]
    capsys.readouterr()
    assert main(["report", "--out", str(out)]) == EXIT_OK
    assert "UniformHigh" in capsys.readouterr().out
    assert main(["report", "--input", str(out / "report.json")]) == EXIT_OK


def test_compare_and_report(tmp_path, capsys):
    out = tmp_path / "cmp"
    assert main(["compare", "--scene", write_scene(tmp_path), "--out", str(out)]) == EXIT_OK
    doc = json.loads((out / "compare.json").read_text())
    assert set(doc["reports"]) == {"Differentiated", "UniformHigh"}
    assert abs(doc["savings_percent"]) <= 0.5
    table = (out / "compare.txt").read_text()
    assert "ET savings" in table
    capsys.readouterr()
    assert main(["report", "--out", str(out)]) == EXIT_OK
    assert capsys.readouterr().out == table


def test_unreachable_point_exit(tmp_path, capsys):
    data = single_object_scene(probes=False).to_dict()
    data["objects"][0]["shape"] = {"type": "box", "center": [2.01, 2.01, 2.3],
                                   "size": [0.6, 0.44, 0.2]}
    data["planning"]["reach"] = [3.0, 3.0, 0.05, 1.5]
    code = main(["plan", "--scene", write_scene(tmp_path, data), "--out", str(tmp_path / "o")])
    assert code == EXIT_UNREACHABLE
    assert "'t'" in capsys.readouterr().err


def test_no_path_exit(tmp_path, capsys):
    data = single_object_scene(probes=False).to_dict()
    data["obstacles"] = [{"shape": {"type": "box", "center": [1.0, 2.0, 0.5],
                                    "size": [0.1, 4.0, 1.0]}}]
    data["chassis"]["start"] = [0.4, 2.0]
    code = main(["plan", "--scene", write_scene(tmp_path, data), "--out", str(tmp_path / "o")])
    assert code == EXIT_NO_PATH
    assert "no path" in capsys.readouterr().err


def test_validation_exit_on_orphan_probe(tmp_path, capsys):
    data = single_object_scene().to_dict()
    # a probe on the floor-resting face is never scanned
    data["probes"].append({"id": "under", "position": [2.01, 2.01, 0.0], "object": "t"})
    code = main(["simulate", "--scene", write_scene(tmp_path, data), "--out", str(tmp_path / "o")])
    assert code == EXIT_VALIDATION
    assert "under" in capsys.readouterr().err


def test_station_policy_without_stations(tmp_path):
    code = main(["simulate", "--scene", write_scene(tmp_path), "--policy", "station",
                 "--out", str(tmp_path / "o")])
    assert code == EXIT_VALIDATION
