import numpy as np
import numpy.testing as npt
import pytest

from fraclane.analysis import residual_at
from fraclane.haar import Resolution
from fraclane.problems import get_experiment
from fraclane.solver import (
    SingularJacobianError,
    SolverConfig,
    condition_estimate_1norm,
    jacobian_fd,
    lu_solve,
    newton_solve,
)

from oracles import manufactured_spec


def test_jacobian_of_simple_map():
    func = lambda c: np.array([c[0] ** 2, c[1]])
    J = jacobian_fd(func, np.array([3.0, 5.0]))
    npt.assert_allclose(J, [[6.0, 0.0], [0.0, 1.0]], atol=1e-6)


def test_jacobian_recovers_affine_map():
    rng = np.random.default_rng(0)
    A = rng.normal(size=(8, 8))
    v = rng.normal(size=8)
    func = lambda c: A @ c - v
    J = jacobian_fd(func, rng.normal(size=8))
    npt.assert_allclose(J, A, atol=1e-7)


def test_jacobian_step_scale_is_adjustable():
    func = lambda c: np.array([c[0] ** 3])
    coarse = jacobian_fd(func, np.array([1.0]), step_scale=1e-3)
    fine = jacobian_fd(func, np.array([1.0]), step_scale=1e-8)
    assert abs(fine[0, 0] - 3.0) < abs(coarse[0, 0] - 3.0)


def test_lu_solve_identity_and_random():
    npt.assert_array_equal(lu_solve(np.eye(3), np.array([1.0, 2.0, 3.0])), [1.0, 2.0, 3.0])
    rng = np.random.default_rng(1)
    A = np.eye(6) + 0.2 * rng.normal(size=(6, 6))
    rhs = rng.normal(size=6)
    npt.assert_allclose(lu_solve(A, rhs), np.linalg.solve(A, rhs), atol=1e-12)


def test_lu_solve_hilbert_four_by_four():
    H = np.array([[1.0 / (i + j + 1) for j in range(4)] for i in range(4)])
    rhs = H @ np.ones(4)
    npt.assert_allclose(lu_solve(H, rhs), np.ones(4), atol=1e-7)


def test_lu_solve_singular_matrix_names_column():
    with pytest.raises(SingularJacobianError) as info:
        lu_solve(np.array([[1.0, 0.0], [0.0, 0.0]]), np.array([1.0, 1.0]))
    assert info.value.column == 1
    with pytest.raises(SingularJacobianError):
        lu_solve(np.array([[1.0, 2.0], [2.0, 4.0]]), np.array([1.0, 1.0]))


def test_lu_solve_rejects_non_finite_input():
    with pytest.raises(ValueError):
        lu_solve(np.array([[np.nan, 0.0], [0.0, 1.0]]), np.array([1.0, 1.0]))


def test_condition_estimate_reference_values():
    assert condition_estimate_1norm(np.eye(5)) == pytest.approx(1.0, rel=1e-12)
    assert condition_estimate_1norm(np.diag([1.0, 1e6])) == pytest.approx(1e6, rel=1e-6)


def test_condition_estimate_tracks_true_one_norm_condition():
    rng = np.random.default_rng(2)
    A = np.eye(16) + 0.1 * rng.normal(size=(16, 16))
    true_cond = np.linalg.norm(A, 1) * np.linalg.norm(np.linalg.inv(A), 1)
    estimate = condition_estimate_1norm(A)
    assert true_cond / 3.0 <= estimate <= true_cond * 3.0


def test_condition_estimate_of_singular_matrix_is_infinite():
    assert condition_estimate_1norm(np.zeros((3, 3))) == np.inf
    assert condition_estimate_1norm(np.array([[1.0, 2.0], [2.0, 4.0]])) == np.inf


def test_newton_solves_manufactured_problem_quickly():
    spec = manufactured_spec((1.6, 0.7, 1.8, 0.9), nonlinear=True)
    result = newton_solve(spec, Resolution(3))
    assert result.converged
    assert result.iterations <= 10
    assert result.residual_norm <= 1e-10
    assert np.isfinite(result.condition)


def test_newton_reproduces_reference_residual_level():
    result = newton_solve(get_experiment("5.1"), Resolution(3))
    assert result.converged
    r1, r2, r = residual_at(result.state, 0.1)
    assert r == pytest.approx(0.014275, rel=1e-3)


def test_newton_history_is_monotone_tail_and_quadratic():
    result = newton_solve(get_experiment("5.1"), Resolution(3))
    history = result.history
    assert len(history) == result.iterations + 1
    assert history[-1] <= 1e-12
    for h_now, h_next in zip(history, history[1:]):
        if h_now <= 0.2 and h_next > 1e-13:
            assert h_next <= 10.0 * h_now**2


def test_newton_is_deterministic():
    a = newton_solve(get_experiment("5.2"), Resolution(3))
    b = newton_solve(get_experiment("5.2"), Resolution(3))
    npt.assert_array_equal(a.coeffs.to_flat(), b.coeffs.to_flat())
    assert a.iterations == b.iterations
    assert a.residual_norm == b.residual_norm
    assert a.condition == b.condition


def test_newton_start_independence():
    spec = get_experiment("5.4")
    res = Resolution(3)
    base = newton_solve(spec, res)
    for seed in (7, 99):
        start = np.random.default_rng(seed).normal(0.0, 0.1, 2 * res.basis_size)
        alt = newton_solve(spec, res, start=start)
        assert alt.converged
        npt.assert_allclose(alt.coeffs.to_flat(), base.coeffs.to_flat(), atol=1e-8)


def test_newton_reports_non_convergence_honestly():
    config = SolverConfig(max_iter=1)
    result = newton_solve(get_experiment("5.1"), Resolution(3), config=config)
    assert not result.converged
    assert result.iterations == 1
    assert result.message
    assert result.residual_norm > 1e-12
    assert result.state.y_at(0.5) == result.state.y_at(0.5)


def test_newton_tolerance_is_respected():
    loose = newton_solve(get_experiment("5.1"), Resolution(3), config=SolverConfig(tol=1e-3))
    strict = newton_solve(get_experiment("5.1"), Resolution(3))
    assert loose.converged and strict.converged
    assert loose.iterations <= strict.iterations
    assert loose.residual_norm <= 1e-3


def test_damped_newton_agrees_with_plain_newton_here():
    plain = newton_solve(get_experiment("5.1"), Resolution(3))
    damped = newton_solve(get_experiment("5.1"), Resolution(3),
                          config=SolverConfig(damping=True))
    assert damped.converged
    npt.assert_allclose(damped.coeffs.to_flat(), plain.coeffs.to_flat(), atol=1e-10)


def test_newton_zero_start_is_default():
    spec = get_experiment("5.3")
    res = Resolution(2)
    implicit = newton_solve(spec, res)
    explicit = newton_solve(spec, res, start=np.zeros(2 * res.basis_size))
    npt.assert_array_equal(implicit.coeffs.to_flat(), explicit.coeffs.to_flat())
