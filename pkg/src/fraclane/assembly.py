"""From Haar coefficients to solution evaluators and collocation residuals.

The trial form expands the highest Caputo derivative of each unknown in the
Haar basis,

    D^a1 y = sum_l a_l h_l,        D^a2 z = sum_l b_l h_l,

so that integrating twice in the fractional sense gives

    y(x) = sum_l a_l (I^a1 h_l)(x) + y(0) + y'(0) x

and the intermediate derivative of order b1 in (0, 1] is

    D^b1 y(x) = sum_l a_l (I^(a1-b1) h_l)(x) + y'(0) x^(1-b1) / gamma(2-b1).

The initial data (y(0), y'(0), z(0), z'(0)) is not free: it is eliminated
exactly from the boundary conditions, so every coefficient vector yields a
solution candidate that satisfies the boundary conditions identically.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .expressions import EvalError, as_function
from .fractional import caputo_linear_term, frac_integral_haar, integration_matrix
from .haar import Resolution, collocation_points, haar_eval, haar_matrix
from .problems import (
    CaseI,
    CaseII,
    FractionalOrders,
    NeumannDirichlet,
    ProblemSpec,
    PureIVP,
    delta_case1,
    delta_case2,
    validate,
)

__all__ = [
    "CoefficientVector",
    "InitialData",
    "AssembledState",
    "case1_intercepts",
    "case2_slopes",
    "initial_data",
    "assemble",
    "residual_system",
    "DiscreteSystem",
]


@dataclass(frozen=True)
class CoefficientVector:
    """Haar coefficients a (for y) and b (for z), one array per unknown."""

    a: np.ndarray
    b: np.ndarray

    def __post_init__(self) -> None:
        a = np.asarray(self.a, dtype=float)
        b = np.asarray(self.b, dtype=float)
        if a.ndim != 1 or b.ndim != 1 or a.shape != b.shape:
            raise ValueError("coefficient arrays must be one-dimensional and equally long")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def basis_size(self) -> int:
        return self.a.size

    @classmethod
    def from_flat(cls, flat, basis_size: int) -> "CoefficientVector":
        flat = np.asarray(flat, dtype=float)
        if flat.size != 2 * basis_size:
            raise ValueError(f"expected {2 * basis_size} entries, got {flat.size}")
        return cls(a=flat[:basis_size].copy(), b=flat[basis_size:].copy())

    def to_flat(self) -> np.ndarray:
        return np.concatenate([self.a, self.b])


@dataclass(frozen=True)
class InitialData:
    """Values and slopes of both unknowns at the origin."""

    y0: float
    yp0: float
    z0: float
    zp0: float


def _series(coeffs: np.ndarray, upsilon: float, x):
    """sum_l c_l (I^upsilon h_l)(x) for scalar or array x."""
    total = 0.0
    for l, c in enumerate(coeffs, start=1):
        if c != 0.0:
            total = total + c * frac_integral_haar(upsilon, l, x)
    if np.ndim(x) > 0 and np.ndim(total) == 0:
        total = np.full(np.shape(x), float(total))
    return total


def _haar_series(coeffs: np.ndarray, x):
    """sum_l c_l h_l(x) for scalar or array x."""
    total = 0.0
    for l, c in enumerate(coeffs, start=1):
        if c != 0.0:
            total = total + c * haar_eval(l, x)
    if np.ndim(x) > 0 and np.ndim(total) == 0:
        total = np.full(np.shape(x), float(total))
    return total


def _case1_core(A1: float, Bnu1: float, Anu2: float, B1: float, bc: CaseI) -> tuple[float, float]:
    delta = delta_case1(bc)
    if abs(delta) < 1e-14:
        raise ValueError("CaseI boundary system is singular (determinant is zero)")
    q1 = 1.0 - bc.a / bc.b
    q2 = 1.0 - bc.c / bc.d
    w1 = bc.mu3 * bc.eta1
    w2 = bc.mu4 * bc.eta2
    t1 = 1.0 - bc.c * bc.nu1 / bc.d
    t2 = 1.0 - bc.a * bc.nu2 / bc.b
    s1 = w1 * (Bnu1 + bc.mu2 * bc.nu1 / bc.d) - bc.mu1 / bc.b - A1
    s2 = w2 * (Anu2 + bc.mu1 * bc.nu2 / bc.b) - B1 - bc.mu2 / bc.d
    y0 = (q2 * s1 + w1 * t1 * s2) / delta
    z0 = (w2 * t2 * s1 + q1 * s2) / delta
    return y0, z0


def _case2_core(A1: float, Bnu1: float, Anu2: float, B1: float, bc: CaseII) -> tuple[float, float]:
    delta = delta_case2(bc)
    if abs(delta) < 1e-14:
        raise ValueError("CaseII boundary system is singular (determinant is zero)")
    q1 = 1.0 - bc.ratio_ba
    q2 = 1.0 - bc.ratio_dc
    w1 = bc.mu3 * bc.eta1
    w2 = bc.mu4 * bc.eta2
    t1 = bc.nu1 - bc.ratio_dc
    t2 = bc.nu2 - bc.ratio_ba
    r1 = w1 * (Bnu1 + bc.mu2_over_c) - bc.mu1_over_a - A1
    r2 = w2 * (Anu2 + bc.mu1_over_a) - bc.mu2_over_c - B1
    yp0 = (q2 * r1 + w1 * t1 * r2) / delta
    zp0 = (w2 * t2 * r1 + q1 * r2) / delta
    return yp0, zp0


def _boundary_sums(coeffs: CoefficientVector, orders: FractionalOrders, bc) -> tuple:
    """Series values entering the boundary closure: y-part at 1 and nu2,
    z-part at 1 and nu1 (interior points only for the four-point cases)."""
    A1 = float(_series(coeffs.a, orders.alpha1, 1.0))
    B1 = float(_series(coeffs.b, orders.alpha2, 1.0))
    if isinstance(bc, (CaseI, CaseII)):
        Bnu1 = float(_series(coeffs.b, orders.alpha2, bc.nu1))
        Anu2 = float(_series(coeffs.a, orders.alpha1, bc.nu2))
    else:
        Bnu1 = 0.0
        Anu2 = 0.0
    return A1, Bnu1, Anu2, B1


def case1_intercepts(coeffs: CoefficientVector, bc: CaseI, orders: FractionalOrders) -> tuple[float, float]:
    """Values y(0), z(0) implied by the coefficients under CaseI conditions."""
    A1, Bnu1, Anu2, B1 = _boundary_sums(coeffs, orders, bc)
    return _case1_core(A1, Bnu1, Anu2, B1, bc)


def case2_slopes(coeffs: CoefficientVector, bc: CaseII, orders: FractionalOrders) -> tuple[float, float]:
    """Slopes y'(0), z'(0) implied by the coefficients under CaseII conditions."""
    A1, Bnu1, Anu2, B1 = _boundary_sums(coeffs, orders, bc)
    return _case2_core(A1, Bnu1, Anu2, B1, bc)


def _initial_from_sums(A1: float, Bnu1: float, Anu2: float, B1: float,
                       bc) -> InitialData:
    if isinstance(bc, PureIVP):
        return InitialData(bc.y0, bc.yp0, bc.z0, bc.zp0)
    if isinstance(bc, NeumannDirichlet):
        return InitialData(
            y0=bc.y1 - bc.yp0 - A1,
            yp0=bc.yp0,
            z0=bc.z1 - bc.zp0 - B1,
            zp0=bc.zp0,
        )
    if isinstance(bc, CaseI):
        y0, z0 = _case1_core(A1, Bnu1, Anu2, B1, bc)
        return InitialData(
            y0=y0,
            yp0=(bc.mu1 - bc.a * y0) / bc.b,
            z0=z0,
            zp0=(bc.mu2 - bc.c * z0) / bc.d,
        )
    if isinstance(bc, CaseII):
        yp0, zp0 = _case2_core(A1, Bnu1, Anu2, B1, bc)
        return InitialData(
            y0=bc.mu1_over_a - bc.ratio_ba * yp0,
            yp0=yp0,
            z0=bc.mu2_over_c - bc.ratio_dc * zp0,
            zp0=zp0,
        )
    raise TypeError(f"unknown boundary condition type {type(bc).__name__}")


def initial_data(coeffs: CoefficientVector, spec: ProblemSpec) -> InitialData:
    """Eliminate the boundary conditions for the initial values and slopes."""
    A1, Bnu1, Anu2, B1 = _boundary_sums(coeffs, spec.orders, spec.boundary)
    return _initial_from_sums(A1, Bnu1, Anu2, B1, spec.boundary)


@dataclass(frozen=True)
class AssembledState:
    """A solution candidate: coefficients plus eliminated initial data.

    The evaluator methods accept scalar or array x in [0, 1].
    """

    spec: ProblemSpec
    res: Resolution
    coeffs: CoefficientVector
    data: InitialData

    @property
    def y0(self) -> float:
        return self.data.y0

    @property
    def yp0(self) -> float:
        return self.data.yp0

    @property
    def z0(self) -> float:
        return self.data.z0

    @property
    def zp0(self) -> float:
        return self.data.zp0

    def y_at(self, x):
        o = self.spec.orders
        return _series(self.coeffs.a, o.alpha1, x) + self.data.y0 + self.data.yp0 * np.asarray(x, dtype=float)

    def z_at(self, x):
        o = self.spec.orders
        return _series(self.coeffs.b, o.alpha2, x) + self.data.z0 + self.data.zp0 * np.asarray(x, dtype=float)

    def dbeta_y_at(self, x):
        """Caputo derivative of y of order beta1."""
        o = self.spec.orders
        return _series(self.coeffs.a, o.alpha1 - o.beta1, x) + self.data.yp0 * caputo_linear_term(o.beta1, x)

    def dbeta_z_at(self, x):
        """Caputo derivative of z of order beta2."""
        o = self.spec.orders
        return _series(self.coeffs.b, o.alpha2 - o.beta2, x) + self.data.zp0 * caputo_linear_term(o.beta2, x)

    def dalpha_y_at(self, x):
        """Caputo derivative of y of order alpha1 (the raw Haar expansion)."""
        return _haar_series(self.coeffs.a, x)

    def dalpha_z_at(self, x):
        """Caputo derivative of z of order alpha2 (the raw Haar expansion)."""
        return _haar_series(self.coeffs.b, x)


def _eval_rhs(f, label: str, x, y, z):
    """Evaluate a right-hand side, pinning domain faults to a grid point."""
    try:
        return f(x, y, z)
    except EvalError as exc:
        for xi, yi, zi in zip(np.atleast_1d(x), np.atleast_1d(y), np.atleast_1d(z)):
            try:
                f(float(xi), float(yi), float(zi))
            except EvalError as point_exc:
                raise EvalError(
                    f"{label} at collocation point x={xi:.9g}: {point_exc.message}",
                    point_exc.source,
                ) from None
        raise exc


def assemble(coeffs: CoefficientVector, spec: ProblemSpec, res: Resolution) -> AssembledState:
    """Bind coefficients to a problem, eliminating the boundary conditions."""
    if coeffs.basis_size != res.basis_size:
        raise ValueError(
            f"coefficient length {coeffs.basis_size} does not match basis size {res.basis_size}"
        )
    return AssembledState(spec=spec, res=res, coeffs=coeffs, data=initial_data(coeffs, spec))


class DiscreteSystem:
    """Collocation equations at the cell midpoints with cached matrices.

    Building the fractional integration matrices costs far more than one
    residual evaluation, so a Newton iteration constructs this once and
    calls residual repeatedly.
    """

    def __init__(self, spec: ProblemSpec, res: Resolution):
        validate(spec)
        self.spec = spec
        self.res = res
        o = spec.orders
        self.points = collocation_points(res)
        n = res.basis_size
        self.haar = haar_matrix(res)
        self.integ1 = integration_matrix(o.alpha1, res)
        self.integ2 = integration_matrix(o.alpha2, res)
        self.inter1 = integration_matrix(o.alpha1 - o.beta1, res)
        self.inter2 = integration_matrix(o.alpha2 - o.beta2, res)
        self.sing1 = spec.sing1.k / self.points**spec.sing1.gamma_exp
        self.sing2 = spec.sing2.k / self.points**spec.sing2.gamma_exp
        self.cap1 = np.asarray(caputo_linear_term(o.beta1, self.points))
        self.cap2 = np.asarray(caputo_linear_term(o.beta2, self.points))
        self.f1 = as_function(spec.f1)
        self.f2 = as_function(spec.f2)
        ls = range(1, n + 1)
        self.end1 = np.array([frac_integral_haar(o.alpha1, l, 1.0) for l in ls])
        self.end2 = np.array([frac_integral_haar(o.alpha2, l, 1.0) for l in ls])
        bc = spec.boundary
        if isinstance(bc, (CaseI, CaseII)):
            self.at_nu1 = np.array([frac_integral_haar(o.alpha2, l, bc.nu1) for l in ls])
            self.at_nu2 = np.array([frac_integral_haar(o.alpha1, l, bc.nu2) for l in ls])
        else:
            self.at_nu1 = None
            self.at_nu2 = None

    @property
    def size(self) -> int:
        """Number of unknowns (and of collocation equations)."""
        return 2 * self.res.basis_size

    def split(self, flat) -> CoefficientVector:
        return CoefficientVector.from_flat(flat, self.res.basis_size)

    def initial_data(self, coeffs: CoefficientVector) -> InitialData:
        A1 = float(coeffs.a @ self.end1)
        B1 = float(coeffs.b @ self.end2)
        if self.at_nu1 is not None:
            Bnu1 = float(coeffs.b @ self.at_nu1)
            Anu2 = float(coeffs.a @ self.at_nu2)
        else:
            Bnu1 = 0.0
            Anu2 = 0.0
        return _initial_from_sums(A1, Bnu1, Anu2, B1, self.spec.boundary)

    def residual(self, flat) -> np.ndarray:
        """Collocation residual of a flat coefficient vector (a then b)."""
        coeffs = self.split(flat)
        data = self.initial_data(coeffs)
        x = self.points
        y = coeffs.a @ self.integ1 + data.y0 + data.yp0 * x
        z = coeffs.b @ self.integ2 + data.z0 + data.zp0 * x
        dby = coeffs.a @ self.inter1 + data.yp0 * self.cap1
        dbz = coeffs.b @ self.inter2 + data.zp0 * self.cap2
        r1 = coeffs.a @ self.haar + self.sing1 * dby - _eval_rhs(self.f1, "f1", x, y, z)
        r2 = coeffs.b @ self.haar + self.sing2 * dbz - _eval_rhs(self.f2, "f2", x, y, z)
        return np.concatenate([r1, r2])

    def state(self, flat) -> AssembledState:
        coeffs = self.split(flat)
        return AssembledState(
            spec=self.spec, res=self.res, coeffs=coeffs, data=self.initial_data(coeffs)
        )


def residual_system(coeffs: CoefficientVector, spec: ProblemSpec, res: Resolution) -> np.ndarray:
    """One-shot collocation residual; equivalent to DiscreteSystem.residual."""
    if coeffs.basis_size != res.basis_size:
        raise ValueError(
            f"coefficient length {coeffs.basis_size} does not match basis size {res.basis_size}"
        )
    return DiscreteSystem(spec, res).residual(coeffs.to_flat())
