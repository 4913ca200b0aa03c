import csv

import numpy as np
import pytest

from uvdose.exceptions import DegenerateGeometry, UnreachablePoint
from uvdose.geometry import Pose, RiskClass, SurfacePoint
from uvdose.irradiance import (LampAssembly, irradiance_assembly, irradiance_quadrature,
                               w_m2_to_mw_cm2)
from uvdose.lp import LinearProgram, vertex_oracle
from uvdose.mapping import SurfaceCloud, generate_scan_trajectory
from uvdose.mapping.trajectory import ScanTrajectory
from uvdose.optimizer import (DoseMatrix, DoseTargets, DwellTimeOptimizer, build_dose_matrix,
                              compare_uniform_vs_differentiated, farthest_point_subsample,
                              optimize_dwell, solve_dwell, write_dose_report_csv,
                              write_speed_profile_csv)

HOT, COLD = RiskClass.HOTSPOT, RiskClass.NON_HOTSPOT
DOWN = np.array([0.0, 0.0, -1.0])
UP = [0.0, 0.0, 1.0]


def pts(*risks):
    return [SurfacePoint([float(i), 0.0, 0.0], UP, r) for i, r in enumerate(risks)]


def facing_pose(z=0.3, x=0.0, y=0.0):
    return Pose.look_along([x, y, z], DOWN, [1.0, 0.0, 0.0])


# -- dose matrix -----------------------------------------------------------
def test_single_segment_delegates():
    asm = LampAssembly()
    traj = ScanTrajectory((facing_pose(),), [0.0])
    point = SurfacePoint([0.0, 0.0, 0.0], UP, HOT)
    dm = build_dose_matrix(traj, [point], asm)
    direct = irradiance_assembly(asm.at(facing_pose()), point)
    assert dm.entries[0, 0] == pytest.approx(w_m2_to_mw_cm2(direct), rel=1e-14)


def test_back_face_column_zero():
    traj = ScanTrajectory((facing_pose(),), [0.0])
    behind = SurfacePoint([0.0, 0.0, 0.6], UP, COLD)
    assert build_dose_matrix(traj, [behind], LampAssembly()).entries[0, 0] == 0.0


def test_entries_match_quadrature_oracle():
    asm = LampAssembly(radiant_flux=2.0)
    poses = tuple(facing_pose(0.3, x) for x in (0.0, 0.1, 0.2))
    traj = ScanTrajectory(poses, [0.05, 0.1, 0.05])
    points = [SurfacePoint([0.05, 0.02, 0.0], UP, HOT), SurfacePoint([0.15, -0.03, 0.0], UP, COLD)]
    dm = build_dose_matrix(traj, points, asm)
    for i, pose in enumerate(poses):
        placed = asm.at(pose)
        for n, p in enumerate(points):
            local = placed.pose.inverse().apply(p.position)
            n_local = placed.pose.inverse().apply_vector(p.normal)
            oracle = sum(irradiance_quadrature(lamp, local, n_local, 100_000) for lamp in asm.lamps)
            assert dm.entries[i, n] == pytest.approx(w_m2_to_mw_cm2(oracle), rel=1e-6)


def test_degenerate_pair_identified():
    traj = ScanTrajectory((facing_pose(), facing_pose(0.3, 5.0, 2.0)), [0.0, 0.0])
    asm = LampAssembly(front_only=False)
    # on the second pose's middle lamp axis (the lamp x axis, at lamp height)
    on_axis = SurfacePoint([5.3, 2.0, 0.3], UP, HOT)
    with pytest.raises(DegenerateGeometry) as info:
        build_dose_matrix(traj, [SurfacePoint([0, 0, 0], UP, HOT), on_axis], asm)
    assert info.value.index == (1, 1)


def test_visibility_zeroes_entries():
    traj = ScanTrajectory((facing_pose(),), [0.0])
    dm = build_dose_matrix(traj, pts(HOT, HOT), LampAssembly(),
                           visibility=lambda src, p: np.array([True, False]))
    assert dm.entries[0, 0] > 0 and dm.entries[0, 1] == 0


# -- dwell optimization ------------------------------------------------------
@pytest.mark.parametrize("risk, expected", [(HOT, 22.0), (COLD, 5.0)])
def test_single_point_examples(risk, expected):
    profile = optimize_dwell(DoseMatrix([[1.0]], [0.0]), pts(risk))
    assert profile.dwell == pytest.approx([expected], rel=1e-6)
    assert profile.total_time == pytest.approx(expected, rel=1e-6)


def test_two_by_two_example():
    # E[i, n]: segment i on point n, so the LP rows are the columns of E
    E = np.array([[2.0, 0.0], [1.0, 3.0]])
    profile = optimize_dwell(DoseMatrix(E, [0.0, 0.0]), pts(HOT, HOT))
    oracle = vertex_oracle(LinearProgram(E.T, [22.0, 22.0], [0.1, 0.1]))
    assert profile.dwell == pytest.approx([22 / 3, 22 / 3], rel=1e-6)
    assert profile.dwell == pytest.approx(oracle.t, rel=1e-6)


def test_unreachable_point_reported():
    with pytest.raises(UnreachablePoint) as info:
        optimize_dwell(DoseMatrix([[1.0, 0.0, 2.0]], [0.0]), pts(HOT, COLD, HOT))
    assert info.value.indices == [1]


def test_compare_examples():
    dm = DoseMatrix([[1.0]], [0.0])
    assert compare_uniform_vs_differentiated(dm, pts(COLD)) == pytest.approx((22.0, 5.0), rel=1e-6)
    u, d = compare_uniform_vs_differentiated(DoseMatrix([[2.0, 1.0], [0.5, 3.0]], [0, 0]),
                                             pts(HOT, HOT))
    assert u == pytest.approx(d, rel=1e-9)


def patch_problem(n_hot_fraction=0.3, seed=0):
    xs = np.arange(0.0, 0.6 + 1e-9, 0.03)
    ys = np.arange(0.0, 0.4 + 1e-9, 0.03)
    positions = np.array([[x, y, 0.0] for x in xs for y in ys])
    rng = np.random.default_rng(seed)
    risk = np.where(positions[:, 0] < n_hot_fraction * 0.6, int(HOT), int(COLD))
    cloud = SurfaceCloud(positions, np.tile(UP, (len(positions), 1)), risk, 0.0, "patch",
                         [0.3, 0.2, 1.0])
    traj = generate_scan_trajectory(cloud, 0.3)
    return build_dose_matrix(traj, cloud, LampAssembly(radiant_flux=5.0)), cloud, rng


def test_mixed_patch_certificate_and_savings():
    dm, cloud, _ = patch_problem()
    targets = DoseTargets()
    diff = optimize_dwell(dm, cloud, targets)
    uni = optimize_dwell(dm, cloud, targets.uniform())
    assert diff.total_time < uni.total_time
    for prof in (diff, uni):
        recomputed = prof.dwell @ dm.entries
        assert np.all(recomputed >= prof.targets * (1 - 1e-6))
        assert prof.dwell.min() >= 0.1
        assert np.allclose(prof.speed, dm.arc_lengths / prof.dwell)
        assert np.all(prof.speed <= 0.25 + 1e-12)


def test_removing_point_never_increases_time():
    dm, cloud, rng = patch_problem()
    full = optimize_dwell(dm, cloud).total_time
    for _ in range(5):
        keep = np.sort(rng.choice(dm.n_points, dm.n_points - 10, replace=False))
        sub = optimize_dwell(DoseMatrix(dm.entries[:, keep], dm.arc_lengths), cloud.subset(keep))
        assert sub.total_time <= full * (1 + 1e-6)


def test_constraint_subsampling_still_certifies():
    dm, cloud, _ = patch_problem()
    prof = optimize_dwell(dm, cloud, max_constraints=20)
    assert prof.constrained_points >= 20
    assert np.all(prof.delivered >= prof.targets * (1 - 1e-9))
    ref = optimize_dwell(dm, cloud)
    assert prof.total_time >= ref.total_time * (1 - 1e-6)


def test_vmax_lower_bound():
    profile = optimize_dwell(DoseMatrix([[10.0]], [1.0]), pts(COLD))
    assert profile.dwell[0] == pytest.approx(4.0)
    assert profile.speed[0] == pytest.approx(0.25)


def test_farthest_point_subsample_deterministic(rng):
    p = rng.uniform(size=(100, 3))
    a, b = farthest_point_subsample(p, 10), farthest_point_subsample(p, 10)
    assert np.array_equal(a, b) and len(np.unique(a)) == 10
    assert np.array_equal(farthest_point_subsample(p, 200), np.arange(100))


def test_solve_dwell_dead_rows():
    with pytest.raises(UnreachablePoint):
        solve_dwell(np.zeros((2, 3)), [1.0, 1.0, 1.0], [0.1, 0.1])


def test_estimator_api():
    X = np.array([[2.0, 1.0], [0.0, 3.0]])  # rows are points
    est = DwellTimeOptimizer().fit(X, [int(HOT), int(HOT)])
    assert est.dwell_ == pytest.approx([22 / 3, 22 / 3], rel=1e-6)
    assert est.predict(X) == pytest.approx([22.0, 22.0], rel=1e-6)
    assert est.score(X, [int(HOT), int(HOT)]) == 1.0
    assert est.get_params()["hotspot_min"] == 22.0
    low = DwellTimeOptimizer(hotspot_min=5.0).fit(X, [int(HOT), int(HOT)])
    assert low.total_time_ < est.total_time_


def test_targets_validation():
    with pytest.raises(ValueError):
        DoseTargets(4.0, 5.0)
    with pytest.raises(ValueError):
        DoseTargets(5.0, 0.0)


def test_csv_writers(tmp_path):
    profile = optimize_dwell(DoseMatrix([[1.0, 2.0], [0.5, 0.0]], [0.1, 0.2]), pts(HOT, COLD))
    path = write_speed_profile_csv(tmp_path / "speed.csv", profile)
    rows = list(csv.reader(path.open()))
    assert rows[0] == ["segment_index", "arc_length_m", "dwell_s", "speed_m_per_s"]
    assert len(rows) == 3
    assert float(rows[1][2]) == pytest.approx(profile.dwell[0])
    path = write_dose_report_csv(tmp_path / "dose.csv", np.zeros((2, 3)), [1, 0],
                                 profile.delivered, profile.targets)
    rows = list(csv.DictReader(path.open()))
    assert [r["risk"] for r in rows] == ["hotspot", "nonhotspot"]
    assert float(rows[0]["margin"]) == pytest.approx(profile.margin[0])
