"""Problem definitions for coupled singular fractional boundary value problems.

A problem couples two equations on (0, 1):

    D^a1 y + (k1 / x^g1) D^b1 y = f1(x, y, z)
    D^a2 z + (k2 / x^g2) D^b2 z = f2(x, y, z)

with 1 < a1, a2 <= 2 and 0 < b1, b2 <= 1 (Caputo derivatives), closed by one
of four boundary condition families.  Five ready-made example problems are
included, and arbitrary problems can be loaded from a TOML file.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Optional, Union

import numpy as np

from . import expressions
from .expressions import Expr, ParseError

try:
    import tomllib
except ImportError:
    import tomli as tomllib

__all__ = [
    "FractionalOrders",
    "SingularTerm",
    "PureIVP",
    "NeumannDirichlet",
    "CaseI",
    "CaseII",
    "BoundaryCondition",
    "ProblemSpec",
    "ProblemValidationError",
    "ConfigError",
    "delta_case1",
    "delta_case2",
    "validate",
    "builtin_experiments",
    "get_experiment",
    "EXPERIMENT_IDS",
    "load_config",
    "with_orders",
]


@dataclass(frozen=True)
class FractionalOrders:
    """Derivative orders (alpha1, beta1) for y and (alpha2, beta2) for z."""

    alpha1: float
    beta1: float
    alpha2: float
    beta2: float


@dataclass(frozen=True)
class SingularTerm:
    """Coefficient k and exponent g of the singular factor k / x**g."""

    k: float
    gamma_exp: float


@dataclass(frozen=True)
class PureIVP:
    """Both values and both slopes prescribed at x = 0."""

    y0: float
    yp0: float
    z0: float
    zp0: float


@dataclass(frozen=True)
class NeumannDirichlet:
    """Slopes prescribed at x = 0, values prescribed at x = 1."""

    yp0: float
    zp0: float
    y1: float
    z1: float


@dataclass(frozen=True)
class CaseI:
    """Four-point conditions, eliminated for the intercepts y(0), z(0):

        a y(0) + b y'(0) = mu1        y(1) = mu3 eta1 z(nu1)
        c z(0) + d z'(0) = mu2        z(1) = mu4 eta2 y(nu2)

    Requires b and d nonzero so the slopes follow from the intercepts.
    """

    a: float
    b: float
    c: float
    d: float
    mu1: float
    mu2: float
    mu3: float
    mu4: float
    eta1: float
    eta2: float
    nu1: float
    nu2: float


@dataclass(frozen=True)
class CaseII:
    """The same four-point conditions, eliminated for the slopes instead:

        y(0) + (b/a) y'(0) = mu1/a    y(1) = mu3 eta1 z(nu1)
        z(0) + (d/c) z'(0) = mu2/c    z(1) = mu4 eta2 y(nu2)

    Parameterized by the ratios b/a and d/c, so b = d = 0 (values of y and
    z pinned at the origin) is expressed by zero ratios.
    """

    ratio_ba: float
    ratio_dc: float
    mu1_over_a: float
    mu2_over_c: float
    mu3: float
    mu4: float
    eta1: float
    eta2: float
    nu1: float
    nu2: float


BoundaryCondition = Union[PureIVP, NeumannDirichlet, CaseI, CaseII]

RightHandSide = Union[Expr, Callable, str]


@dataclass(frozen=True)
class ProblemSpec:
    """Full description of a coupled problem.

    f1 and f2 may be expression trees, source strings or plain callables of
    (x, y, z).  When an expression form is known its source is kept in
    f1_source / f2_source so the problem can be echoed and serialized.
    residual_weight, when set, multiplies pointwise residuals in reports
    (used when the natural formulation of an equation carries a weight).
    """

    name: str
    orders: FractionalOrders
    sing1: SingularTerm
    sing2: SingularTerm
    f1: RightHandSide
    f2: RightHandSide
    boundary: BoundaryCondition
    f1_source: Optional[str] = None
    f2_source: Optional[str] = None
    residual_weight: Optional[Callable] = field(default=None, compare=False)


class ProblemValidationError(ValueError):
    """One or more structural problems; all of them are listed."""

    def __init__(self, errors: list[str]):
        super().__init__("; ".join(errors))
        self.errors = list(errors)


class ConfigError(ValueError):
    """Malformed problem configuration file."""


def delta_case1(bc: CaseI) -> float:
    """Determinant of the 2x2 system for (y(0), z(0)) under CaseI conditions."""
    q1 = 1.0 - bc.a / bc.b
    q2 = 1.0 - bc.c / bc.d
    t1 = 1.0 - bc.c * bc.nu1 / bc.d
    t2 = 1.0 - bc.a * bc.nu2 / bc.b
    return q1 * q2 - bc.mu3 * bc.mu4 * bc.eta1 * bc.eta2 * t1 * t2


def delta_case2(bc: CaseII) -> float:
    """Determinant of the 2x2 system for (y'(0), z'(0)) under CaseII conditions."""
    q1 = 1.0 - bc.ratio_ba
    q2 = 1.0 - bc.ratio_dc
    t1 = bc.nu1 - bc.ratio_dc
    t2 = bc.nu2 - bc.ratio_ba
    return q1 * q2 - bc.mu3 * bc.mu4 * bc.eta1 * bc.eta2 * t1 * t2


def _check_rhs(f, label: str, errors: list[str]) -> None:
    if callable(f) or isinstance(f, (expressions.Num, expressions.Var, expressions.Call, expressions.Neg, expressions.BinOp)):
        return
    if isinstance(f, str):
        try:
            expressions.parse(f)
        except ParseError as exc:
            errors.append(f"{label}: {exc}")
        return
    errors.append(f"{label} must be an expression or a callable, got {type(f).__name__}")


def validate(spec: ProblemSpec) -> ProblemSpec:
    """Check a problem for structural defects; returns the problem unchanged.

    All detected defects are reported together in a single
    ProblemValidationError rather than stopping at the first.
    """
    errors: list[str] = []
    o = spec.orders
    for label, alpha in (("alpha1", o.alpha1), ("alpha2", o.alpha2)):
        if not 1.0 < alpha <= 2.0:
            errors.append(f"{label} must lie in (1, 2], got {alpha}")
    for label, beta in (("beta1", o.beta1), ("beta2", o.beta2)):
        if not 0.0 < beta <= 1.0:
            errors.append(f"{label} must lie in (0, 1], got {beta}")
    if o.beta1 >= o.alpha1:
        errors.append(f"beta1 must be smaller than alpha1, got {o.beta1} >= {o.alpha1}")
    if o.beta2 >= o.alpha2:
        errors.append(f"beta2 must be smaller than alpha2, got {o.beta2} >= {o.alpha2}")
    for label, sing in (("sing1", spec.sing1), ("sing2", spec.sing2)):
        if sing.k < 0.0:
            errors.append(f"{label}: singular coefficient must be non-negative, got {sing.k}")
        if sing.gamma_exp <= 0.0:
            errors.append(f"{label}: singular exponent must be positive, got {sing.gamma_exp}")
    _check_rhs(spec.f1, "f1", errors)
    _check_rhs(spec.f2, "f2", errors)
    bc = spec.boundary
    if isinstance(bc, CaseI):
        if bc.b == 0.0:
            errors.append("CaseI requires b != 0 (with b = 0 use CaseII ratios instead)")
        if bc.d == 0.0:
            errors.append("CaseI requires d != 0 (with d = 0 use CaseII ratios instead)")
        for label, nu in (("nu1", bc.nu1), ("nu2", bc.nu2)):
            if not 0.0 <= nu <= 1.0:
                errors.append(f"{label} must lie in [0, 1], got {nu}")
        if bc.b != 0.0 and bc.d != 0.0 and abs(delta_case1(bc)) < 1e-14:
            errors.append("CaseI boundary system is singular (determinant is zero)")
    elif isinstance(bc, CaseII):
        for label, nu in (("nu1", bc.nu1), ("nu2", bc.nu2)):
            if not 0.0 <= nu <= 1.0:
                errors.append(f"{label} must lie in [0, 1], got {nu}")
        if abs(delta_case2(bc)) < 1e-14:
            errors.append("CaseII boundary system is singular (determinant is zero)")
    elif not isinstance(bc, (PureIVP, NeumannDirichlet)):
        errors.append(f"unknown boundary condition type {type(bc).__name__}")
    if errors:
        raise ProblemValidationError(errors)
    return spec


def _expr_problem(name, orders, sing1, sing2, f1_source, f2_source, f1, f2,
                  boundary, residual_weight=None) -> ProblemSpec:
    return validate(ProblemSpec(
        name=name,
        orders=FractionalOrders(*orders),
        sing1=SingularTerm(*sing1),
        sing2=SingularTerm(*sing2),
        f1=f1,
        f2=f2,
        boundary=boundary,
        f1_source=f1_source,
        f2_source=f2_source,
        residual_weight=residual_weight,
    ))


def _experiment_51() -> ProblemSpec:
    def f1(x, y, z):
        return z**3 * (y**2 + 1.0)

    def f2(x, y, z):
        return -(z**5 * (y**2 + 3.0))

    return _expr_problem(
        name="coupled-singular-ivp",
        orders=(1.58, 0.58, 1.59, 0.59),
        sing1=(1.0, 1.0),
        sing2=(3.0, 1.0),
        f1_source="z^3*(y^2+1)",
        f2_source="-(z^5*(y^2+3))",
        f1=f1,
        f2=f2,
        boundary=PureIVP(y0=1.0, yp0=0.0, z0=1.0, zp0=0.0),
    )


def _experiment_52() -> ProblemSpec:
    def f1(x, y, z):
        return -(8.0 * np.exp(y - 1.0)) - 16.0 * np.exp(-((z - 1.0) / 2.0))

    def f2(x, y, z):
        return 8.0 * np.exp(-(z - 1.0)) + 8.0 * np.exp((y - 1.0) / 2.0)

    return _expr_problem(
        name="exponential-bvp",
        orders=(1.56, 0.56, 1.57, 0.57),
        sing1=(5.0, 1.0),
        sing2=(3.0, 1.0),
        f1_source="-(8*exp(y-1)) - 16*exp(-((z-1)/2))",
        f2_source="8*exp(-(z-1)) + 8*exp((y-1)/2)",
        f1=f1,
        f2=f2,
        boundary=NeumannDirichlet(
            yp0=0.0,
            zp0=0.0,
            y1=1.0 - 2.0 * math.log(2.0),
            z1=1.0 + 2.0 * math.log(2.0),
        ),
    )


def _experiment_53() -> ProblemSpec:
    def f1(x, y, z):
        return -(99.0 / 35.0 - 1.0 / (2.0 * x)
                 + z * (x - (66.0 / 35.0) * x**2 + (1089.0 / 1225.0) * x**3)
                 - y**2 * z / x)

    def f2(x, y, z):
        return -(-(24.0 / 35.0) + (64.0 / 1225.0) * x**4
                 - (2112.0 / 42875.0) * x**5 - y * z**2 / x)

    def weight(x):
        return np.sqrt(x)

    return _expr_problem(
        name="four-point-bvp",
        orders=(1.56, 0.58, 1.58, 0.56),
        sing1=(0.5, 1.0),
        sing2=(0.5, 1.0),
        f1_source=("-(99/35 - 1/(2*x) + z*(x - (66/35)*x^2 + (1089/1225)*x^3)"
                   " - y^2*z/x)"),
        f2_source="-(-(24/35) + (64/1225)*x^4 - (2112/42875)*x^5 - y*z^2/x)",
        f1=f1,
        f2=f2,
        boundary=CaseII(
            ratio_ba=0.0,
            ratio_dc=0.0,
            mu1_over_a=0.0,
            mu2_over_c=0.0,
            mu3=1.0,
            mu4=1.0,
            eta1=1.0,
            eta2=1.0,
            nu1=0.5,
            nu2=1.0 / 3.0,
        ),
        residual_weight=weight,
    )


def _experiment_54() -> ProblemSpec:
    def f1(x, y, z):
        return y**2 + (2.0 / 5.0) * y * z

    def f2(x, y, z):
        return (1.0 / 2.0) * y**2 + y * z

    return _expr_problem(
        name="catalytic-diffusion",
        orders=(1.61, 0.62, 1.62, 0.63),
        sing1=(2.0, 1.0),
        sing2=(2.0, 1.0),
        f1_source="y^2 + (2/5)*y*z",
        f2_source="(1/2)*y^2 + y*z",
        f1=f1,
        f2=f2,
        boundary=NeumannDirichlet(yp0=0.0, zp0=0.0, y1=1.0, z1=2.0),
    )


def _experiment_55() -> ProblemSpec:
    def f1(x, y, z):
        den = (1.0 / 10000.0 + y) * (1.0 / 10000.0 + z)
        return -1.0 + 5.0 * y * z / den + (1.0 / 10.0) * y * z / den

    def f2(x, y, z):
        den = (1.0 / 10000.0 + y) * (1.0 / 10000.0 + z)
        return (1.0 / 10.0) * y * z / den + (5.0 / 100.0) * y * z / den

    den_src = "((1/10000+y)*(1/10000+z))"
    return _expr_problem(
        name="substrate-uptake",
        orders=(1.62, 0.62, 1.63, 0.63),
        sing1=(2.0, 1.0),
        sing2=(2.0, 1.0),
        f1_source=f"-1 + 5*y*z/{den_src} + (1/10)*y*z/{den_src}",
        f2_source=f"(1/10)*y*z/{den_src} + (5/100)*y*z/{den_src}",
        f1=f1,
        f2=f2,
        boundary=NeumannDirichlet(yp0=0.0, zp0=0.0, y1=1.0, z1=1.0),
    )


_BUILTINS: dict[str, Callable[[], ProblemSpec]] = {
    "5.1": _experiment_51,
    "5.2": _experiment_52,
    "5.3": _experiment_53,
    "5.4": _experiment_54,
    "5.5": _experiment_55,
}

EXPERIMENT_IDS = tuple(_BUILTINS)


def builtin_experiments() -> list[ProblemSpec]:
    """All ready-made example problems, freshly constructed."""
    return [factory() for factory in _BUILTINS.values()]


def get_experiment(experiment_id: str) -> ProblemSpec:
    """Look up a ready-made problem by its identifier ('5.1' .. '5.5')."""
    try:
        factory = _BUILTINS[experiment_id]
    except KeyError:
        known = ", ".join(EXPERIMENT_IDS)
        raise KeyError(f"unknown experiment {experiment_id!r}; known ids: {known}") from None
    return factory()


_ORDER_KEYS = ("alpha1", "beta1", "alpha2", "beta2")
_SING_KEYS = ("k", "gamma")
_BOUNDARY_PARAMS = {
    "PureIVP": ("y0", "yp0", "z0", "zp0"),
    "NeumannDirichlet": ("yp0", "zp0", "y1", "z1"),
    "CaseI": ("a", "b", "c", "d", "mu1", "mu2", "mu3", "mu4",
              "eta1", "eta2", "nu1", "nu2"),
    "CaseII": ("ratio_ba", "ratio_dc", "mu1_over_a", "mu2_over_c",
               "mu3", "mu4", "eta1", "eta2", "nu1", "nu2"),
}
_BOUNDARY_TYPES = {
    "PureIVP": PureIVP,
    "NeumannDirichlet": NeumannDirichlet,
    "CaseI": CaseI,
    "CaseII": CaseII,
}


def _require_table(data: dict, key: str, where: str) -> dict:
    if key not in data:
        raise ConfigError(f"{where}: missing required table [{key}]")
    value = data[key]
    if not isinstance(value, dict):
        raise ConfigError(f"{where}: [{key}] must be a table")
    return value


def _numeric_fields(table: dict, keys: tuple, where: str) -> dict[str, float]:
    unknown = set(table) - set(keys)
    if unknown:
        raise ConfigError(f"{where}: unknown fields {sorted(unknown)}")
    missing = [k for k in keys if k not in table]
    if missing:
        raise ConfigError(f"{where}: missing fields {missing}")
    out = {}
    for k in keys:
        value = table[k]
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{where}: field {k!r} must be a number, got {value!r}")
        out[k] = float(value)
    return out


def load_config(path) -> ProblemSpec:
    """Read a problem definition from a TOML file.

    Required structure: [orders] with alpha1/beta1/alpha2/beta2, [sing1] and
    [sing2] with k/gamma, top-level f1 and f2 expression strings, and a
    [boundary] table with mode and [boundary.parameters].  An optional
    top-level name defaults to the file stem.  Unknown fields anywhere are
    rejected.
    """
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    try:
        data = tomllib.loads(raw.decode("utf-8"))
    except (tomllib.TOMLDecodeError, UnicodeDecodeError) as exc:
        raise ConfigError(f"{path}: invalid TOML: {exc}") from exc

    allowed_top = {"name", "orders", "sing1", "sing2", "f1", "f2", "boundary"}
    unknown = set(data) - allowed_top
    if unknown:
        raise ConfigError(f"{path}: unknown top-level fields {sorted(unknown)}")

    name = data.get("name", path.stem)
    if not isinstance(name, str):
        raise ConfigError(f"{path}: name must be a string")

    orders = _numeric_fields(_require_table(data, "orders", str(path)), _ORDER_KEYS, f"{path} [orders]")
    sing1 = _numeric_fields(_require_table(data, "sing1", str(path)), _SING_KEYS, f"{path} [sing1]")
    sing2 = _numeric_fields(_require_table(data, "sing2", str(path)), _SING_KEYS, f"{path} [sing2]")

    sources = {}
    for key in ("f1", "f2"):
        if key not in data:
            raise ConfigError(f"{path}: missing required field {key}")
        if not isinstance(data[key], str):
            raise ConfigError(f"{path}: {key} must be an expression string")
        try:
            sources[key] = expressions.parse(data[key])
        except ParseError as exc:
            raise ConfigError(f"{path}: {key}: {exc}") from exc

    boundary_table = _require_table(data, "boundary", str(path))
    unknown = set(boundary_table) - {"mode", "parameters"}
    if unknown:
        raise ConfigError(f"{path} [boundary]: unknown fields {sorted(unknown)}")
    mode = boundary_table.get("mode")
    if mode not in _BOUNDARY_TYPES:
        known = ", ".join(_BOUNDARY_TYPES)
        raise ConfigError(f"{path} [boundary]: mode must be one of {known}, got {mode!r}")
    params_table = boundary_table.get("parameters")
    if not isinstance(params_table, dict):
        raise ConfigError(f"{path} [boundary]: missing [boundary.parameters] table")
    params = _numeric_fields(params_table, _BOUNDARY_PARAMS[mode], f"{path} [boundary.parameters]")
    boundary = _BOUNDARY_TYPES[mode](**params)

    spec = ProblemSpec(
        name=name,
        orders=FractionalOrders(**orders),
        sing1=SingularTerm(k=sing1["k"], gamma_exp=sing1["gamma"]),
        sing2=SingularTerm(k=sing2["k"], gamma_exp=sing2["gamma"]),
        f1=sources["f1"],
        f2=sources["f2"],
        boundary=boundary,
        f1_source=data["f1"],
        f2_source=data["f2"],
    )
    try:
        return validate(spec)
    except ProblemValidationError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def with_orders(spec: ProblemSpec, orders: FractionalOrders) -> ProblemSpec:
    """Copy of a problem with different derivative orders."""
    return validate(replace(spec, orders=orders))
