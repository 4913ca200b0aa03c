import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from uvdose.exceptions import DegenerateGeometry, NegativeDuration
from uvdose.geometry import Pose, RiskClass, SurfacePoint
from uvdose.irradiance import (Lamp, LampAssembly, accumulate_dose, irradiance_assembly,
                               irradiance_closed_form, irradiance_quadrature, segment_contributions,
                               w_m2_to_mw_cm2, w_m2_to_uw_cm2)

DOWN = np.array([0.0, 0.0, -1.0])


def brute_force_lamp(lamp, p, n, n_segments):
    """Independent midpoint sum in plain Python loops (center-based cosine)."""
    x, y, z = p
    to_center = -np.array([x, y - lamp.y_offset, z])
    cos = max(0.0, min(1.0, float(np.dot(to_center / np.linalg.norm(to_center), n))))
    h = lamp.length / n_segments
    total = 0.0
    for k in range(n_segments):
        ell = -lamp.length / 2 + (k + 0.5) * h
        r2 = (x - ell) ** 2 + (y - lamp.y_offset) ** 2 + z ** 2
        total += lamp.radiant_flux / lamp.length * h / (4 * math.pi * r2)
    return total * cos


def test_closed_form_reference_example():
    lamp = Lamp(0.2, 1.0)
    expected = 1.0 / (4 * math.pi * 0.2 * 0.3) * 2 * math.atan(1 / 3)
    value = irradiance_closed_form(lamp, [0, 0, 0.3], DOWN)
    assert value == pytest.approx(expected, rel=1e-12)
    quad = irradiance_quadrature(lamp, [0, 0, 0.3], DOWN, 100_000)
    assert quad == pytest.approx(value, rel=1e-9)


def test_closed_form_matches_loop_oracle():
    lamp = Lamp(0.135, 1.3, 0.05)
    p = np.array([0.04, -0.02, 0.25])
    n = np.array([0.1, 0.2, -1.0]) / np.linalg.norm([0.1, 0.2, -1.0])
    assert irradiance_closed_form(lamp, p, n) == pytest.approx(
        brute_force_lamp(lamp, p, n, 4000), rel=1e-6)


def test_grazing_and_back_face_are_zero():
    lamp = Lamp(0.2, 1.0)
    assert irradiance_closed_form(lamp, [0, 0, 0.3], [1, 0, 0]) == 0.0
    assert irradiance_closed_form(lamp, [0, 0, 0.3], [0, 0, 1]) == 0.0
    for n_seg in (10, 1000):
        assert irradiance_quadrature(lamp, [0, 0, 0.3], [1, 0, 0], n_seg) == 0.0


def test_on_axis_point_raises():
    with pytest.raises(DegenerateGeometry):
        irradiance_closed_form(Lamp(0.2, 1.0), [0.05, 0.0, 0.0], DOWN)
    with pytest.raises(DegenerateGeometry):
        irradiance_quadrature(Lamp(0.2, 1.0, 0.05), [0.0, 0.05, 0.0], DOWN, 10)


def test_quadrature_converges_monotonically():
    lamp = Lamp(0.135, 1.0)
    p, n = np.array([0.03, 0.01, 0.2]), np.array([0.0, 0.0, -1.0])
    exact = irradiance_closed_form(lamp, p, n)
    errors = [abs(irradiance_quadrature(lamp, p, n, k) - exact) / exact
              for k in (1_000, 10_000, 100_000)]
    assert errors[0] > errors[1] > errors[2]
    assert errors[2] <= 1e-6


def test_quadrature_symmetric_halves():
    lamp = Lamp(0.2, 1.0)
    contrib = segment_contributions(lamp, [0.0, 0.0, 0.3], DOWN, 1000)[0]
    assert contrib[:500].sum() == pytest.approx(contrib[500:].sum(), rel=1e-12)


def test_assembly_coincident_lamps_is_three_times_single():
    asm = LampAssembly(Pose.identity(), 1.0, 0.135, 1e-12)
    p = np.array([0.02, 0.1, 0.3])
    single = irradiance_closed_form(Lamp(0.135, 1.0), p, DOWN)
    assert irradiance_assembly(asm, p, DOWN) == pytest.approx(3 * single, rel=1e-10)


def test_assembly_upper_lower_symmetric():
    asm = LampAssembly()
    upper, _, lower = asm.lamps
    p = np.array([0.0, 0.0, 0.3])
    assert irradiance_closed_form(upper, p, DOWN) == pytest.approx(
        irradiance_closed_form(lower, p, DOWN), rel=1e-12)


def test_assembly_matches_per_lamp_quadrature(rng):
    for _ in range(20):
        q = rng.normal(size=4)
        pose = Pose(rng.uniform(-1, 1, 3), q / np.linalg.norm(q))
        asm = LampAssembly(pose)
        local = np.array([rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2), rng.uniform(0.1, 0.5)])
        n_local = -local / np.linalg.norm(local) + rng.normal(scale=0.2, size=3)
        n_local /= np.linalg.norm(n_local)
        p_world, n_world = pose.apply(local), pose.apply_vector(n_local)
        oracle = sum(irradiance_quadrature(lamp, local, n_local, 100_000) for lamp in asm.lamps)
        got = irradiance_assembly(asm, p_world, n_world)
        assert got == pytest.approx(oracle, rel=1e-6)
        sp = SurfacePoint(p_world, n_world, RiskClass.HOTSPOT)
        assert irradiance_assembly(asm, sp) == pytest.approx(got, rel=1e-14)


def test_reflector_blocks_rear_half_space():
    asm = LampAssembly()
    assert irradiance_assembly(asm, [0.0, 0.0, -0.3], [0, 0, 1]) == 0.0
    # on a lamp axis but beyond the reflector plane: dark rather than singular
    assert irradiance_assembly(asm, [-1.0, 0.0, 0.0], [1, 0, 0]) == 0.0
    free = LampAssembly(front_only=False)
    assert irradiance_assembly(free, [0.0, 0.0, -0.3], [0, 0, 1]) > 0.0
    with pytest.raises(DegenerateGeometry):
        irradiance_assembly(free, [1.0, 0.0, 0.0], [1, 0, 0])


def test_inverse_square_far_field():
    asm = LampAssembly()
    L = asm.length
    values = [irradiance_assembly(asm, [0, 0, k * L], DOWN) * (k * L) ** 2 for k in (20, 40, 80)]
    assert max(values) / min(values) - 1 < 0.01


@settings(max_examples=200, deadline=None)
@given(st.floats(-0.5, 0.5), st.floats(-0.5, 0.5), st.floats(0.01, 2.0),
       st.floats(-1, 1), st.floats(-1, 1), st.floats(-1, 1))
def test_irradiance_non_negative(x, y, z, nx, ny, nz):
    n = np.array([nx, ny, nz])
    if np.linalg.norm(n) < 1e-3:
        n = DOWN
    n = n / np.linalg.norm(n)
    assert irradiance_assembly(LampAssembly(), [x, y, z], n) >= 0.0


def test_accumulate_dose_examples():
    assert accumulate_dose(10.0, 22.0) == pytest.approx(22.0, abs=1e-12)
    assert accumulate_dose(10.0, 0.0) == 0.0
    assert accumulate_dose(2.5, 8.0) == pytest.approx(2.0, abs=1e-12)
    with pytest.raises(NegativeDuration):
        accumulate_dose(1.0, -0.1)


@settings(max_examples=100, deadline=None)
@given(st.floats(0, 100), st.floats(0, 1000), st.floats(0, 1000))
def test_dose_additivity(E, t1, t2):
    total = accumulate_dose(E, t1 + t2)
    parts = accumulate_dose(E, t1) + accumulate_dose(E, t2)
    assert total == pytest.approx(parts, rel=1e-12, abs=1e-12)


def test_unit_conversions():
    assert w_m2_to_mw_cm2(10.0) == pytest.approx(1.0)
    assert w_m2_to_uw_cm2(1.0) == pytest.approx(100.0)
