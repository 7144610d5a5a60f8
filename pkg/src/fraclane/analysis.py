"""Residual-error reports and resolution sweeps.

The quality measure is the pointwise residual of the assembled solution,

    r1(x) = |D^a1 y(x) + (k1 / x^g1) D^b1 y(x) - f1(x, y(x), z(x))|

and likewise r2, combined as r = sqrt(r1^2 + r2^2), with E the maximum of
r over an evaluation grid.  Reports carry the conventional nine-point grid
x = 0.1 .. 0.9 together with a dense interior grid, because the residual
between collocation points is the honest error indicator.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .assembly import AssembledState
from .expressions import as_function
from .haar import Resolution
from .problems import FractionalOrders, ProblemSpec
from .solver import SolverConfig, newton_solve

__all__ = [
    "ResidualReport",
    "ConvergenceTable",
    "SweepRow",
    "NINE_POINT_GRID",
    "DENSE_GRID_SIZE",
    "residual_at",
    "residual_table",
    "convergence_sweep",
    "absolute_error_vs_oracle",
]

NINE_POINT_GRID = np.round(np.arange(1, 10) * 0.1, 1)
DENSE_GRID_SIZE = 401


@dataclass(frozen=True)
class ResidualReport:
    """Residual magnitudes on an evaluation grid.

    E is the maximum of r over this report's own grid.  For the default
    nine-point report, dense holds a companion report on a 401-point
    interior grid whose maximum can only be larger.
    """

    grid: np.ndarray
    r1: np.ndarray
    r2: np.ndarray
    r: np.ndarray
    E: float
    dense: Optional["ResidualReport"] = None


@dataclass(frozen=True)
class SweepRow:
    """Result of one resolution level inside a sweep."""

    J: int
    E: float
    condition: float
    iterations: int
    converged: bool
    message: str = ""


@dataclass(frozen=True)
class ConvergenceTable:
    """E and solver diagnostics per resolution level, J ascending."""

    rows: list[SweepRow]
    orders: FractionalOrders

    def empirical_orders(self) -> list[float]:
        """log2(E(J) / E(J')) between consecutive rows; the decay exponent."""
        out = []
        for lo, hi in zip(self.rows, self.rows[1:]):
            if lo.E > 0.0 and hi.E > 0.0:
                out.append(math.log2(lo.E / hi.E) / (hi.J - lo.J))
            else:
                out.append(float("inf"))
        return out


def _residual_vectors(state: AssembledState, points: np.ndarray):
    spec = state.spec
    x = np.asarray(points, dtype=float)
    if x.size == 0 or np.any(x <= 0.0) or np.any(x >= 1.0):
        raise ValueError("evaluation points must lie strictly inside (0, 1)")
    y = np.asarray(state.y_at(x))
    z = np.asarray(state.z_at(x))
    s1 = spec.sing1.k / x**spec.sing1.gamma_exp
    s2 = spec.sing2.k / x**spec.sing2.gamma_exp
    f1 = as_function(spec.f1)
    f2 = as_function(spec.f2)
    r1 = np.abs(state.dalpha_y_at(x) + s1 * state.dbeta_y_at(x) - f1(x, y, z))
    r2 = np.abs(state.dalpha_z_at(x) + s2 * state.dbeta_z_at(x) - f2(x, y, z))
    if spec.residual_weight is not None:
        w = np.asarray(spec.residual_weight(x), dtype=float)
        r1 = r1 * w
        r2 = r2 * w
    return r1, r2, np.hypot(r1, r2)


def residual_at(state: AssembledState, x: float) -> tuple[float, float, float]:
    """Componentwise residuals (r1, r2) and magnitude r at one point."""
    r1, r2, r = _residual_vectors(state, np.array([float(x)]))
    return float(r1[0]), float(r2[0]), float(r[0])


def _bare_report(state: AssembledState, points: np.ndarray) -> ResidualReport:
    r1, r2, r = _residual_vectors(state, points)
    return ResidualReport(
        grid=np.asarray(points, dtype=float),
        r1=r1,
        r2=r2,
        r=r,
        E=float(np.max(r)),
    )


def residual_table(state: AssembledState, points: Optional[Sequence[float]] = None) -> ResidualReport:
    """Residual report over a grid, default x = 0.1, 0.2, ..., 0.9.

    The default report nests a companion on a dense 401-point interior
    grid; pass explicit points to get a bare single-grid report.
    """
    if points is not None:
        return _bare_report(state, np.asarray(points, dtype=float))
    nine = _bare_report(state, NINE_POINT_GRID.copy())
    dense_grid = np.arange(1, DENSE_GRID_SIZE + 1) / (DENSE_GRID_SIZE + 1)
    dense = _bare_report(state, dense_grid)
    return ResidualReport(
        grid=nine.grid,
        r1=nine.r1,
        r2=nine.r2,
        r=nine.r,
        E=nine.E,
        dense=dense,
    )


def convergence_sweep(
    spec: ProblemSpec,
    J_list: Sequence[int],
    config: Optional[SolverConfig] = None,
) -> ConvergenceTable:
    """Solve once per resolution level and tabulate E with diagnostics.

    A solver failure at one level is recorded in its row and the sweep
    continues with the remaining levels.
    """
    levels = list(J_list)
    if not levels or any(lo >= hi for lo, hi in zip(levels, levels[1:])):
        raise ValueError(f"resolution levels must be a nonempty ascending list, got {J_list!r}")
    rows = []
    for J in levels:
        result = newton_solve(spec, Resolution(J), config)
        report = residual_table(result.state)
        rows.append(SweepRow(
            J=J,
            E=report.E,
            condition=result.condition,
            iterations=result.iterations,
            converged=result.converged,
            message=result.message,
        ))
    return ConvergenceTable(rows=rows, orders=spec.orders)


def absolute_error_vs_oracle(
    state: AssembledState,
    oracle: Callable,
    points: Sequence[float],
) -> tuple[np.ndarray, np.ndarray]:
    """Pointwise |y - y_ref| and |z - z_ref| against a reference solution.

    The oracle maps a point x to the pair (y_ref, z_ref).
    """
    pts = np.asarray(points, dtype=float)
    dy = np.empty(pts.size)
    dz = np.empty(pts.size)
    for i, x in enumerate(pts):
        ref_y, ref_z = oracle(float(x))
        dy[i] = abs(float(state.y_at(float(x))) - ref_y)
        dz[i] = abs(float(state.z_at(float(x))) - ref_z)
    return dy, dz
