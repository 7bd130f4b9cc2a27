import csv
import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hamshift.are import AreProblem, check_assumptions, residual, solve_stabilizing
from hamshift.bench import (
    BenchmarkSpec,
    LqrProblem,
    are_to_lqr_realization,
    case_study,
    generate_benchmark,
    lqr_to_are,
    trajectory_csv,
)
from hamshift.exceptions import AssumptionError, ShapeError
from hamshift.numerics import min_eig
from hamshift.shift import ShiftWindow


def test_lqr_validation():
    with pytest.raises(ShapeError):
        LqrProblem(np.eye(2), np.ones((2, 1)), np.ones((1, 2)), [[-1.0]])
    with pytest.raises(ShapeError):
        LqrProblem(np.eye(2), np.ones((2, 2)), np.ones((1, 2)), [[1.0, 1.0], [0.0, 1.0]])
    l = LqrProblem(np.eye(3), np.ones((3, 2)), np.ones((1, 3)), np.eye(2))
    assert (l.n, l.m, l.p) == (3, 2, 1)


def test_lqr_to_are_examples():
    a = lqr_to_are(LqrProblem(np.eye(2), [[1.0], [0.0]], np.zeros((0, 2)), [[1.0]]))
    assert np.array_equal(a.D, np.diag([1.0, 0.0]))
    assert not a.Q.any()
    a = lqr_to_are(LqrProblem(np.eye(2), np.eye(2), np.eye(2), np.eye(2)))
    assert np.array_equal(a.Q, np.eye(2)) and np.array_equal(a.D, np.eye(2))


def test_lqr_to_are_random(rng):
    l = LqrProblem(rng.standard_normal((5, 5)), rng.standard_normal((5, 2)),
                   rng.standard_normal((2, 5)), np.diag([1.0, 3.0]))
    a = lqr_to_are(l)
    for M, r in ((a.Q, 2), (a.D, 2)):
        assert min_eig(M) >= -1e-12
        assert np.linalg.matrix_rank(M, tol=1e-10) <= r
    assert np.allclose(a.D, l.B @ np.diag([1.0, 1 / 3]) @ l.B.T)


def test_realization_examples():
    l = are_to_lqr_realization(AreProblem(np.eye(2), np.eye(2), np.diag([1.0, 0.0])))
    assert l.m == 1 and np.allclose(np.abs(l.B[:, 0]), [1, 0])
    assert np.allclose(l.C.T @ l.C, np.eye(2))
    l = are_to_lqr_realization(AreProblem(np.eye(2), np.eye(2), np.zeros((2, 2))))
    assert l.m == 0 and l.B.shape == (2, 0)
    l = are_to_lqr_realization(AreProblem([[1.17678]], [[1.78033]], [[1.28033]]))
    # sqrt(1.28033); the frozen value is derived, not copied
    assert abs(l.B[0, 0]) == pytest.approx(1.13152, abs=1e-5)
    assert abs(l.C[0, 0]) == pytest.approx(1.33429, abs=1e-5)
    with pytest.raises(AssumptionError):
        are_to_lqr_realization(AreProblem([[1.0]], [[-1.0]], [[1.0]]))


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 6), st.integers(0, 6), st.integers(0, 6), st.integers(0, 2**32 - 1))
def test_realization_roundtrip(n, m, p, seed):
    r = np.random.default_rng(seed)
    B = r.standard_normal((n, m))
    C = r.standard_normal((p, n))
    a = AreProblem(r.standard_normal((n, n)), C.T @ C, B @ B.T)
    back = lqr_to_are(are_to_lqr_realization(a))
    scale = max(np.linalg.norm(a.Q), np.linalg.norm(a.D), 1.0)
    assert np.linalg.norm(back.Q - a.Q) <= 1e-10 * scale
    assert np.linalg.norm(back.D - a.D) <= 1e-10 * scale
    assert np.array_equal(back.A, a.A)


def test_spec_validation():
    with pytest.raises(ValueError):
        BenchmarkSpec(3, 4, 1)
    with pytest.raises(ValueError):
        BenchmarkSpec(10, 3, 3, realizable_block=3)
    BenchmarkSpec(10, 3, 3, realizable_block=2)


def test_generate_deterministic():
    spec = BenchmarkSpec(8, 2, 2, seed=5)
    a, b = generate_benchmark(spec), generate_benchmark(spec)
    for x, y in zip((a.A, a.B, a.C, a.R), (b.A, b.B, b.C, b.R)):
        assert np.array_equal(x, y)
    assert check_assumptions(lqr_to_are(a)).ok
    assert np.linalg.norm(a.A, 2) < 10


def test_generate_scalar():
    l = generate_benchmark(BenchmarkSpec(1, 1, 1, seed=0))
    assert solve_stabilizing(lqr_to_are(l)).is_stabilizing


def test_generate_full_size():
    l = generate_benchmark(BenchmarkSpec(100, 10, 10, seed=1))
    assert (l.n, l.m, l.p) == (100, 10, 10)
    a = lqr_to_are(l)
    assert np.linalg.matrix_rank(a.D) == 10 and np.linalg.matrix_rank(a.Q) == 10


def test_case_study_zero_shifts():
    s = case_study(BenchmarkSpec(6, 2, 2, seed=0), 0)
    assert s.table() == [(0, 0.0, 0.0, 0.0)]
    assert s.solution_rel_error == 0


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_end_to_end_outsourcing(seed):
    spec = BenchmarkSpec(30, 5, 5, seed=seed)
    s = case_study(spec, 5, "problem1")
    a = lqr_to_are(generate_benchmark(spec))
    P_tilde = solve_stabilizing(s.final).P
    assert s.closed_loop_stable
    assert np.all(np.linalg.eigvals(a.A - a.D @ P_tilde).real < 0)
    assert residual(a, P_tilde) <= 1e-8 * (1 + np.linalg.norm(P_tilde) ** 2)
    assert s.solution_rel_error <= 1e-8


def test_case_study_monotone_small():
    s = case_study(BenchmarkSpec(30, 5, 5, seed=3), 8, window=ShiftWindow(monotone=True))
    tab = np.array([r[1:] for r in s.table()], float)
    assert np.all(np.diff(tab, axis=0) >= -1e-10)
    assert np.all(tab[1:] > 0)


def test_case_study_problem2_realizable_block():
    spec = BenchmarkSpec(20, 4, 4, seed=2, realizable_block=2)
    s = case_study(spec, 1, "problem2")
    assert len(s.rows) == 2
    assert min_eig(s.final.Q) >= -1e-8 * max(1, np.linalg.norm(s.final.Q, 2))
    assert min_eig(s.final.D) >= -1e-8 * max(1, np.linalg.norm(s.final.D, 2))
    assert s.solution_rel_error <= 1e-8


def test_case_study_mode_check():
    with pytest.raises(ValueError):
        case_study(BenchmarkSpec(4, 1, 1), 1, "problem3")


def test_trajectory_csv():
    s = case_study(BenchmarkSpec(10, 3, 3, seed=0), 2)
    rows = list(csv.reader(io.StringIO(trajectory_csv(s))))
    assert rows[0] == ["iteration", "relA", "relD", "relQ"]
    assert [int(r[0]) for r in rows[1:]] == list(range(len(s.rows)))
    assert float(rows[-1][1]) == s.rows[-1].rel_change_A
