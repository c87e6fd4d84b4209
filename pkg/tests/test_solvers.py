import io
import math

import numpy as np
import pytest

from polycond.errors import DataError, InputError
from polycond.objectives import QuadraticObjective, half_sq_norm
from polycond.solvers import (SolveConfig, contraction_factor, fw_away_step, initial_point,
                              minimize_quadratic, read_trace_csv, solve, verify_linear_rate)

DELTA3 = np.eye(4)


def _trace(algo, L, iters=200, obj=None, A=DELTA3, **kw):
    return solve(obj or half_sq_norm(A.shape[0]), A,
                 SolveConfig(algorithm=algo, max_iters=iters, L=L, **kw))


def test_fw_converges_to_barycenter():
    tr = _trace("fw_away", 0.5, iters=500)
    assert tr.final.f == pytest.approx(1 / 8, abs=1e-8)
    assert tr.records[0].support_size == 1
    assert tr.records[-1].step_type == "stop"


def test_pg_converges_with_l2_constant():
    # restricted l2 norm of I on sum(w)=0 is 1
    tr = _trace("proj_grad", 1.0, iters=100)
    assert tr.final.f == pytest.approx(1 / 8, abs=1e-12)


def test_pg_with_l1_constant_oscillates():
    tr = _trace("proj_grad", 0.5, iters=20)
    f = tr.f_values()
    assert abs(f[-1] - f[-3]) < 1e-12 and f.min() > 1 / 8 + 0.01


def test_linear_objective_one_step():
    obj = QuadraticObjective(np.zeros((2, 2)), np.array([1.0, 2.0]))
    A = np.array([[0.0, 1.0, -1.0], [1.0, 0.0, 0.0]])
    tr = solve(obj, A, SolveConfig(max_iters=5, exact_line_search=True, x0="vertex:0"))
    assert tr.final.f == pytest.approx(-1.0)
    assert tr.status == "converged"
    assert len(tr.records) == 2


def test_exact_line_search_step():
    x, rec = fw_away_step(half_sq_norm(2), np.eye(2), np.array([1.0, 0.0]), 1.0, exact_ls=True)
    assert np.allclose(x, [0.5, 0.5])
    assert rec.step_type == "regular"


def test_step_rule():
    x, rec = fw_away_step(half_sq_norm(2), np.eye(2), np.array([1.0, 0.0]), 1.0)
    # gap 1, step 1 / (4 L)
    assert rec.gap == pytest.approx(1.0)
    assert rec.alpha == pytest.approx(0.25)
    assert np.allclose(x, [0.75, 0.25])


def test_away_and_drop_steps():
    A = np.array([[0.0, 1.0, 0.5], [0.0, 0.0, 1.0]])
    obj = QuadraticObjective(np.eye(2), -np.array([0.5, 0.0]))
    x0 = np.array([0.45, 0.45, 0.1])
    x, rec = fw_away_step(obj, A, x0, 0.05)
    assert rec.step_type == "drop"
    assert rec.alpha == pytest.approx(0.1 / 0.9)
    assert x[2] == 0.0 and x.sum() == pytest.approx(1.0)
    x, rec = fw_away_step(obj, A, x0, 1.0)
    assert rec.step_type == "away" and x[2] > 0


def test_backtracking_runs_and_descends():
    rng = np.random.default_rng(0)
    A = rng.normal(size=(3, 6))
    tr = solve(half_sq_norm(3), A, SolveConfig(max_iters=100, L0=0.01))
    f = tr.f_values()
    assert np.all(np.diff(f) <= 1e-14)
    assert tr.L_mode == "backtracking"


def test_pg_backtracking():
    tr = solve(half_sq_norm(4), DELTA3, SolveConfig("proj_grad", max_iters=50, L0=0.1))
    assert tr.final.f == pytest.approx(1 / 8, abs=1e-10)


def test_target_gap_stops():
    tr = _trace("fw_away", 0.5, iters=1000, target_gap=1e-3)
    assert tr.status == "converged"
    assert tr.final.gap <= 1e-3


def test_csv_round_trip():
    tr = _trace("fw_away", 0.5, iters=30)
    buf = io.StringIO()
    tr.write_csv(buf)
    text = buf.getvalue()
    assert text.splitlines()[0] == "k,f,gap,step_type,alpha,alpha_max,support_size"
    back = read_trace_csv(io.StringIO(text))
    assert np.array_equal(back.f_values(), tr.f_values())
    assert back.vertex_start


def test_csv_bad_header():
    with pytest.raises(InputError):
        read_trace_csv(io.StringIO("a,b\n1,2\n"))


def test_initial_points():
    assert np.array_equal(initial_point("vertex:2", 3), [0, 0, 1])
    assert np.allclose(initial_point("barycenter", 4), 0.25)
    with pytest.raises(InputError):
        initial_point("vertex:9", 3)
    with pytest.raises(InputError):
        initial_point(np.array([0.5, 0.6]), 2)


def test_config_validation():
    with pytest.raises(InputError):
        SolveConfig(algorithm="newton")
    with pytest.raises(InputError):
        SolveConfig(L=-1.0)


def test_minimize_quadratic_matches_kkt():
    rng = np.random.default_rng(3)
    for _ in range(10):
        B = rng.normal(size=(3, 3))
        obj = QuadraticObjective(B @ B.T + 0.1 * np.eye(3), rng.normal(size=3))
        A = rng.normal(size=(3, 5))
        res = minimize_quadratic(obj, A)
        # projected first-order condition on conv(A)
        g = obj.grad(res.u)
        assert (A.T @ g).min() - g @ res.u >= -1e-10


def test_rate_verdicts():
    tr = _trace("fw_away", 0.5, iters=100)
    v = verify_linear_rate(tr, 1 / 8, 0.5, 0.25)
    assert v.ok and v.holds[0]
    assert v.rate == pytest.approx(contraction_factor(0.5, 0.25, "fw_away"))


def test_rate_preconditions():
    tr = _trace("fw_away", 0.5, iters=20)
    with pytest.raises(DataError):
        verify_linear_rate(tr, 1.0, 0.5, 0.25)  # f_star above trace values
    with pytest.raises(DataError):
        verify_linear_rate(tr, 1 / 8, 0.5, 0.0)
    with pytest.raises(DataError):
        verify_linear_rate(tr, 1 / 8, 0.7, 0.25)  # L mismatch
    bary = _trace("fw_away", 0.5, iters=20, x0="barycenter")
    with pytest.raises(DataError):
        verify_linear_rate(bary, 1 / 8, 0.5, 0.25)
    bt = solve(half_sq_norm(4), DELTA3, SolveConfig(max_iters=10))
    with pytest.raises(DataError):
        verify_linear_rate(bt, 1 / 8, 1.0, 0.25)


def test_violated_trace_detected():
    tr = _trace("fw_away", 0.5, iters=5)
    tr.records[3].f = tr.records[0].f
    assert not verify_linear_rate(tr, 1 / 8, 0.5, 0.25).ok


def test_contraction_floor():
    assert contraction_factor(1.0, 100.0, "proj_grad") == 0.5
    assert contraction_factor(1.0, 1.0, "fw_away") == pytest.approx(1 - 1 / 16)
    assert math.isclose(contraction_factor(1.0, 1.0, "proj_grad"), 0.75)
