import math

import numpy as np
import numpy.testing as npt
import pytest

from fraclane.assembly import (
    AssembledState,
    CoefficientVector,
    DiscreteSystem,
    InitialData,
    assemble,
    case1_intercepts,
    case2_slopes,
    initial_data,
    residual_system,
)
from fraclane.expressions import EvalError
from fraclane.fractional import gamma
from fraclane.haar import Resolution, collocation_points
from fraclane.problems import (
    CaseI,
    CaseII,
    FractionalOrders,
    NeumannDirichlet,
    ProblemSpec,
    PureIVP,
    SingularTerm,
    get_experiment,
    validate,
)

from oracles import case1_brute_intercepts, manufactured_spec


def make_spec(**overrides):
    base = dict(
        name="assembly-test",
        orders=FractionalOrders(1.5, 0.5, 1.5, 0.5),
        sing1=SingularTerm(k=1.0, gamma_exp=1.0),
        sing2=SingularTerm(k=1.0, gamma_exp=1.0),
        f1=lambda x, y, z: 0.0,
        f2=lambda x, y, z: 0.0,
        boundary=PureIVP(y0=0.0, yp0=0.0, z0=0.0, zp0=0.0),
    )
    base.update(overrides)
    return validate(ProblemSpec(**base))


def random_coeffs(res, seed, scale=1.0):
    rng = np.random.default_rng(seed)
    return CoefficientVector(
        a=scale * rng.normal(size=res.basis_size),
        b=scale * rng.normal(size=res.basis_size),
    )


CASE1 = CaseI(a=0.4, b=1.3, c=-0.2, d=0.9, mu1=0.7, mu2=-0.3, mu3=0.6, mu4=0.5,
              eta1=1.2, eta2=0.8, nu1=0.35, nu2=0.65)
CASE2 = CaseII(ratio_ba=0.3, ratio_dc=-0.2, mu1_over_a=0.9, mu2_over_c=0.4,
               mu3=0.7, mu4=0.6, eta1=1.1, eta2=0.9, nu1=0.25, nu2=0.75)


def test_coefficient_vector_flat_round_trip():
    coeffs = CoefficientVector(a=np.arange(4.0), b=np.arange(4.0, 8.0))
    flat = coeffs.to_flat()
    npt.assert_array_equal(flat, np.arange(8.0))
    back = CoefficientVector.from_flat(flat, 4)
    npt.assert_array_equal(back.a, coeffs.a)
    npt.assert_array_equal(back.b, coeffs.b)
    assert back.basis_size == 4


def test_coefficient_vector_validates_shapes():
    with pytest.raises(ValueError):
        CoefficientVector(a=np.zeros(3), b=np.zeros(4))
    with pytest.raises(ValueError):
        CoefficientVector(a=np.zeros((2, 2)), b=np.zeros(4))
    with pytest.raises(ValueError):
        CoefficientVector.from_flat(np.zeros(7), 4)


def test_zero_coefficients_give_affine_start():
    spec = make_spec(boundary=PureIVP(y0=1.0, yp0=0.0, z0=1.0, zp0=0.0))
    res = Resolution(2)
    state = assemble(CoefficientVector(np.zeros(8), np.zeros(8)), spec, res)
    xs = np.linspace(0.0, 1.0, 9)
    npt.assert_allclose(state.y_at(xs), np.ones(9), atol=1e-15)
    npt.assert_allclose(state.z_at(xs), np.ones(9), atol=1e-15)
    npt.assert_allclose(state.dbeta_y_at(xs[1:]), np.zeros(8), atol=1e-15)
    assert (state.y0, state.yp0, state.z0, state.zp0) == (1.0, 0.0, 1.0, 0.0)


def test_single_scaling_coefficient_reproduces_power_function():
    orders = FractionalOrders(1.58, 0.58, 1.59, 0.59)
    spec = make_spec(orders=orders)
    res = Resolution(2)
    a = np.zeros(8)
    a[0] = gamma(orders.alpha1 + 1.0)
    state = assemble(CoefficientVector(a, np.zeros(8)), spec, res)
    xs = np.linspace(0.0, 1.0, 17)
    npt.assert_allclose(state.y_at(xs), xs**orders.alpha1, atol=1e-13)
    npt.assert_allclose(state.dalpha_y_at(0.3), a[0], atol=1e-15)
    expected_dbeta = gamma(orders.alpha1 + 1.0) / gamma(orders.alpha1 - orders.beta1 + 1.0)
    assert state.dbeta_y_at(0.5) == pytest.approx(expected_dbeta * 0.5 ** (orders.alpha1 - orders.beta1), rel=1e-13)


def test_classical_limit_matches_finite_differences():
    spec = make_spec(orders=FractionalOrders(2.0, 1.0, 2.0, 1.0),
                     boundary=PureIVP(y0=0.3, yp0=-0.2, z0=0.1, zp0=0.4))
    res = Resolution(2)
    state = assemble(random_coeffs(res, seed=1), spec, res)
    h = 1e-4
    for x in collocation_points(res):
        dy = (state.y_at(x + h) - state.y_at(x - h)) / (2.0 * h)
        assert state.dbeta_y_at(x) == pytest.approx(dy, abs=1e-5)
        d2y = (state.y_at(x + h) - 2.0 * state.y_at(x) + state.y_at(x - h)) / h**2
        assert state.dalpha_y_at(x) == pytest.approx(d2y, abs=1e-5)
        dz = (state.z_at(x + h) - state.z_at(x - h)) / (2.0 * h)
        assert state.dbeta_z_at(x) == pytest.approx(dz, abs=1e-5)


def test_initial_data_passthrough_for_pure_ivp():
    spec = make_spec(boundary=PureIVP(y0=1.5, yp0=-0.5, z0=2.0, zp0=0.25))
    data = initial_data(random_coeffs(Resolution(1), seed=2), spec)
    assert data == InitialData(y0=1.5, yp0=-0.5, z0=2.0, zp0=0.25)


def test_neumann_dirichlet_hits_both_ends():
    bc = NeumannDirichlet(yp0=0.2, zp0=-0.1, y1=0.8, z1=1.4)
    spec = make_spec(boundary=bc)
    res = Resolution(2)
    for seed in range(5):
        state = assemble(random_coeffs(res, seed=seed), spec, res)
        assert state.yp0 == bc.yp0
        assert state.zp0 == bc.zp0
        assert state.y_at(1.0) == pytest.approx(bc.y1, abs=1e-12)
        assert state.z_at(1.0) == pytest.approx(bc.z1, abs=1e-12)


def test_case1_intercepts_with_zero_data():
    bc = CaseI(a=0.0, b=1.0, c=0.0, d=1.0, mu1=0.0, mu2=0.0, mu3=0.5, mu4=0.5,
               eta1=1.0, eta2=1.0, nu1=0.5, nu2=0.5)
    coeffs = CoefficientVector(np.zeros(4), np.zeros(4))
    y0, z0 = case1_intercepts(coeffs, bc, FractionalOrders(1.5, 0.5, 1.5, 0.5))
    assert (y0, z0) == (0.0, 0.0)


def test_case1_intercepts_decoupled_end_conditions():
    # with mu3 = mu4 = 0 and no wavelet part, y(1) = 0 forces y0 = -mu1/(b - a)
    bc = CaseI(a=0.4, b=1.3, c=-0.2, d=0.9, mu1=0.7, mu2=-0.3, mu3=0.0, mu4=0.0,
               eta1=1.2, eta2=0.8, nu1=0.35, nu2=0.65)
    spec = make_spec(boundary=bc)
    res = Resolution(1)
    coeffs = CoefficientVector(np.zeros(4), np.zeros(4))
    y0, z0 = case1_intercepts(coeffs, bc, spec.orders)
    assert y0 == pytest.approx(-bc.mu1 / (bc.b - bc.a), rel=1e-14)
    assert z0 == pytest.approx(-bc.mu2 / (bc.d - bc.c), rel=1e-14)
    state = assemble(coeffs, spec, res)
    assert state.y_at(1.0) == pytest.approx(0.0, abs=1e-14)
    assert state.z_at(1.0) == pytest.approx(0.0, abs=1e-14)


def test_case1_intercepts_match_black_box_solve():
    spec = make_spec(boundary=CASE1)
    res = Resolution(1)
    for seed in range(10):
        coeffs = random_coeffs(res, seed=seed)
        got = case1_intercepts(coeffs, CASE1, spec.orders)
        expected = case1_brute_intercepts(coeffs, CASE1, spec.orders)
        npt.assert_allclose(got, expected, atol=1e-12)


def test_case1_boundary_equations_hold():
    spec = make_spec(boundary=CASE1)
    res = Resolution(2)
    bc = CASE1
    for seed in range(10):
        state = assemble(random_coeffs(res, seed=seed), spec, res)
        assert bc.a * state.y0 + bc.b * state.yp0 == pytest.approx(bc.mu1, abs=1e-12)
        assert bc.c * state.z0 + bc.d * state.zp0 == pytest.approx(bc.mu2, abs=1e-12)
        assert state.y_at(1.0) == pytest.approx(
            bc.mu3 * bc.eta1 * state.z_at(bc.nu1), abs=1e-12)
        assert state.z_at(1.0) == pytest.approx(
            bc.mu4 * bc.eta2 * state.y_at(bc.nu2), abs=1e-12)


def test_case2_slopes_with_zero_data():
    bc = CaseII(ratio_ba=0.0, ratio_dc=0.0, mu1_over_a=0.9, mu2_over_c=0.4,
                mu3=0.0, mu4=0.0, eta1=1.0, eta2=1.0, nu1=0.5, nu2=0.5)
    coeffs = CoefficientVector(np.zeros(4), np.zeros(4))
    yp0, zp0 = case2_slopes(coeffs, bc, FractionalOrders(1.5, 0.5, 1.5, 0.5))
    assert yp0 == pytest.approx(-0.9, rel=1e-14)
    assert zp0 == pytest.approx(-0.4, rel=1e-14)


def test_case2_boundary_equations_hold():
    spec = make_spec(boundary=CASE2)
    res = Resolution(2)
    bc = CASE2
    for seed in range(10):
        state = assemble(random_coeffs(res, seed=seed), spec, res)
        assert state.y0 + bc.ratio_ba * state.yp0 == pytest.approx(bc.mu1_over_a, abs=1e-12)
        assert state.z0 + bc.ratio_dc * state.zp0 == pytest.approx(bc.mu2_over_c, abs=1e-12)
        assert state.y_at(1.0) == pytest.approx(
            bc.mu3 * bc.eta1 * state.z_at(bc.nu1), abs=1e-12)
        assert state.z_at(1.0) == pytest.approx(
            bc.mu4 * bc.eta2 * state.y_at(bc.nu2), abs=1e-12)


def test_case2_zero_ratio_pins_left_value():
    bc = CaseII(ratio_ba=0.0, ratio_dc=0.0, mu1_over_a=0.7, mu2_over_c=-0.2,
                mu3=0.5, mu4=0.5, eta1=1.0, eta2=1.0, nu1=0.5, nu2=0.5)
    spec = make_spec(boundary=bc)
    res = Resolution(2)
    state = assemble(random_coeffs(res, seed=3), spec, res)
    assert state.y_at(0.0) == pytest.approx(0.7, abs=1e-13)
    assert state.z_at(0.0) == pytest.approx(-0.2, abs=1e-13)


def test_four_point_interior_conditions_for_builtin():
    spec = get_experiment("5.3")
    res = Resolution(2)
    for seed in range(5):
        state = assemble(random_coeffs(res, seed=seed), spec, res)
        assert state.y_at(1.0) == pytest.approx(state.z_at(0.5), abs=1e-12)
        assert state.z_at(1.0) == pytest.approx(state.y_at(1.0 / 3.0), abs=1e-12)


def test_case1_with_pinned_slopes_reduces_to_neumann_dirichlet():
    bc1 = CaseI(a=0.0, b=1.0, c=0.0, d=1.0, mu1=0.0, mu2=0.0, mu3=0.6, mu4=0.7,
                eta1=1.0, eta2=1.0, nu1=0.4, nu2=0.3)
    spec1 = make_spec(boundary=bc1, f1=lambda x, y, z: y * z, f2=lambda x, y, z: y - z)
    res = Resolution(2)
    coeffs = random_coeffs(res, seed=9, scale=0.5)
    state1 = assemble(coeffs, spec1, res)
    assert state1.yp0 == pytest.approx(0.0, abs=1e-15)
    spec2 = make_spec(
        boundary=NeumannDirichlet(yp0=0.0, zp0=0.0,
                                  y1=state1.y_at(1.0), z1=state1.z_at(1.0)),
        f1=lambda x, y, z: y * z, f2=lambda x, y, z: y - z)
    state2 = assemble(coeffs, spec2, res)
    npt.assert_allclose(
        residual_system(coeffs, spec1, res),
        residual_system(coeffs, spec2, res),
        atol=1e-12,
    )


def test_evaluators_are_affine_in_coefficients():
    spec = make_spec(boundary=CASE1)
    res = Resolution(2)
    c1 = random_coeffs(res, seed=4)
    c2 = random_coeffs(res, seed=5)
    lam = 0.37
    mix = CoefficientVector(a=c1.a + lam * (c2.a - c1.a), b=c1.b + lam * (c2.b - c1.b))
    s1 = assemble(c1, spec, res)
    s2 = assemble(c2, spec, res)
    sm = assemble(mix, spec, res)
    for x in (0.0, 0.21, 0.63, 1.0):
        expected = s1.y_at(x) + lam * (s2.y_at(x) - s1.y_at(x))
        assert sm.y_at(x) == pytest.approx(expected, abs=1e-11)
        expected = s1.z_at(x) + lam * (s2.z_at(x) - s1.z_at(x))
        assert sm.z_at(x) == pytest.approx(expected, abs=1e-11)


def test_residual_zero_for_homogeneous_problem():
    spec = make_spec(sing1=SingularTerm(k=0.0, gamma_exp=1.0),
                     sing2=SingularTerm(k=0.0, gamma_exp=1.0))
    res = Resolution(2)
    coeffs = CoefficientVector(np.zeros(8), np.zeros(8))
    npt.assert_array_equal(residual_system(coeffs, spec, res), np.zeros(16))


def test_residual_vanishes_at_manufactured_solution():
    spec = manufactured_spec((1.6, 0.7, 1.8, 0.9))
    res = Resolution(3)
    a = np.zeros(res.basis_size)
    b = np.zeros(res.basis_size)
    a[0] = math.gamma(1.6 + 1.0)
    b[0] = math.gamma(1.8 + 1.0)
    residual = residual_system(CoefficientVector(a, b), spec, res)
    assert np.max(np.abs(residual)) <= 1e-10


def test_discrete_system_matches_free_functions():
    spec = get_experiment("5.4")
    res = Resolution(2)
    system = DiscreteSystem(spec, res)
    assert system.size == 16
    coeffs = random_coeffs(res, seed=6, scale=0.3)
    flat = coeffs.to_flat()
    npt.assert_array_equal(system.residual(flat), residual_system(coeffs, spec, res))
    split = system.split(flat)
    npt.assert_array_equal(split.a, coeffs.a)
    data = system.initial_data(coeffs)
    free_data = initial_data(coeffs, spec)
    assert data.y0 == pytest.approx(free_data.y0, abs=1e-13)
    assert data.zp0 == pytest.approx(free_data.zp0, abs=1e-13)
    state = system.state(flat)
    direct = assemble(coeffs, spec, res)
    assert state.y_at(0.5) == pytest.approx(direct.y_at(0.5), abs=1e-14)


def test_solved_coefficients_zero_the_collocation_residual():
    from fraclane.solver import newton_solve

    result = newton_solve(get_experiment("5.1"), Resolution(3))
    assert result.converged
    residual = residual_system(result.coeffs, get_experiment("5.1"), Resolution(3))
    assert np.max(np.abs(residual)) <= 1e-10


def test_domain_fault_reports_first_bad_collocation_point():
    spec = make_spec(f1="log(y)", f2="0",
                     boundary=PureIVP(y0=-1.0, yp0=0.0, z0=0.0, zp0=0.0))
    res = Resolution(1)
    coeffs = CoefficientVector(np.zeros(4), np.zeros(4))
    with pytest.raises(EvalError) as info:
        residual_system(coeffs, spec, res)
    assert "f1 at collocation point x=0.125" in str(info.value)


def test_assemble_rejects_size_mismatch():
    spec = make_spec()
    with pytest.raises(ValueError):
        assemble(CoefficientVector(np.zeros(4), np.zeros(4)), spec, Resolution(3))
