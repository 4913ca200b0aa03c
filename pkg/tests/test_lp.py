import numpy as np
import pytest
from conftest import random_lp
from hypothesis import given, settings
from hypothesis import strategies as st

from uvdose.exceptions import DimensionMismatch, TooLarge
from uvdose.lp import (LinearProgram, LpStatus, read_lp_text, solve, vertex_oracle,
                       write_lp_text)

EXAMPLES = [
    (LinearProgram([[1.0]], [22.0], [0.1]), [22.0], 22.0),
    (LinearProgram([[1.0]], [0.05], [0.1]), [0.1], 0.1),
    (LinearProgram([[2.0, 1.0], [0.0, 3.0]], [22.0, 22.0], [0.1, 0.1]), [22 / 3, 22 / 3], 44 / 3),
]


def certify(lp, sol):
    """Post-hoc checks that do not depend on solver internals."""
    assert sol.status is LpStatus.OPTIMAL
    assert lp.is_feasible(sol.t)
    assert max(sol.kkt_residuals) <= 1e-6


@pytest.mark.parametrize("lp, t, obj", EXAMPLES)
def test_examples(lp, t, obj):
    sol = solve(lp)
    certify(lp, sol)
    assert sol.t == pytest.approx(t, rel=1e-6)
    assert sol.objective == pytest.approx(obj, rel=1e-6)
    oracle = vertex_oracle(lp)
    assert oracle.t == pytest.approx(t, rel=1e-9, abs=1e-12)
    assert oracle.objective == pytest.approx(obj, rel=1e-9)


def test_zero_row_infeasible():
    lp = LinearProgram([[1.0, 0.5], [0.0, 0.0]], [5.0, 5.0], [0.1, 0.1])
    sol = solve(lp)
    assert sol.status is LpStatus.INFEASIBLE
    assert 1 in sol.infeasible_rows
    assert vertex_oracle(lp).status is LpStatus.INFEASIBLE


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        solve(LinearProgram([[1.0, 2.0]], [1.0, 2.0], [0.0, 0.0]))
    with pytest.raises(DimensionMismatch):
        solve(LinearProgram([[1.0, 2.0]], [1.0], [0.0]))


def test_oracle_size_cap():
    with pytest.raises(TooLarge):
        vertex_oracle(LinearProgram(np.ones((21, 2)), np.ones(21), np.zeros(2)))
    with pytest.raises(TooLarge):
        vertex_oracle(LinearProgram(np.ones((2, 13)), np.ones(2), np.zeros(13)))


def test_random_lps_match_oracle(rng):
    for _ in range(200):
        lp = random_lp(rng)
        sol, ref = solve(lp), vertex_oracle(lp)
        certify(lp, sol)
        assert sol.objective == pytest.approx(ref.objective, rel=1e-5)


def test_random_3x4_lps_match_oracle(rng):
    for _ in range(200):
        lp = LinearProgram(rng.uniform(0, 1, (3, 4)), rng.uniform(1, 10, 3), np.zeros(4))
        assert solve(lp).objective == pytest.approx(vertex_oracle(lp).objective, rel=1e-5)


def test_weak_duality_every_iteration(rng):
    for _ in range(20):
        lp = random_lp(rng)
        sol = solve(lp)
        assert sol.history
        for rec in sol.history:
            assert rec.dual_objective <= rec.primal_objective + 1e-9 * max(1.0, abs(rec.primal_objective))


def test_duplicate_constraints_do_not_change_optimum(rng):
    for _ in range(20):
        lp = random_lp(rng, max_vars=5, max_constraints=6)
        dup = LinearProgram(np.vstack([lp.A, lp.A[:2]]), np.concatenate([lp.b, lp.b[:2]]), lp.lb)
        assert solve(dup).objective == pytest.approx(solve(lp).objective, rel=1e-6)
        assert vertex_oracle(dup).objective == pytest.approx(vertex_oracle(lp).objective, rel=1e-9)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31 - 1), st.floats(0.1, 10.0))
def test_homogeneity_with_zero_bounds(seed, lam):
    lp = random_lp(np.random.default_rng(seed), max_vars=6, max_constraints=8, lb_zero=True)
    base = solve(lp)
    scaled = solve(LinearProgram(lp.A, lam * lp.b, lp.lb))
    assert scaled.objective == pytest.approx(lam * base.objective, rel=1e-6)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31 - 1), st.floats(0.0, 5.0))
def test_monotone_in_targets(seed, bump):
    rng = np.random.default_rng(seed)
    lp = random_lp(rng, max_vars=6, max_constraints=8)
    b = lp.b.copy()
    b[rng.integers(len(b))] += bump
    harder = solve(LinearProgram(lp.A, b, lp.lb))
    assert harder.objective >= solve(lp).objective - 1e-6 * max(1.0, harder.objective)


def test_lp_text_round_trip(tmp_path, rng):
    lp = random_lp(rng)
    path = tmp_path / "lp.txt"
    write_lp_text(lp, path)
    back = read_lp_text(path)
    assert np.array_equal(back.A, lp.A) and np.array_equal(back.b, lp.b)
    assert np.array_equal(back.lb, lp.lb) and np.array_equal(back.c, lp.c)
    m, n = lp.A.shape
    assert path.read_text().splitlines()[0] == f"{m} {n}"
    assert len(path.read_text().splitlines()) == m + 3


def test_lp_text_weighted_objective():
    lp = LinearProgram([[1.0, 2.0]], [3.0], [0.0, 0.0], [2.0, 1.0])
    back = read_lp_text(write_lp_text(lp))
    assert np.array_equal(back.c, [2.0, 1.0])
    assert solve(back).objective == pytest.approx(1.5, rel=1e-6)


def test_validation_rejects_negative_entries():
    with pytest.raises(ValueError):
        solve(LinearProgram([[-1.0]], [1.0], [0.0]))
    with pytest.raises(ValueError):
        solve(LinearProgram([[1.0]], [1.0], [-0.5]))
