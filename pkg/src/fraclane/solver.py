"""Newton iteration on the collocation equations.

The nonlinear system has one equation per collocation point and unknown
pair, 4M equations in 4M Haar coefficients at resolution J (M = 2**J).
The Jacobian is approximated by forward differences, factored once per
iteration, and reused for an optional step-halving line search.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.linalg import LinAlgWarning, lu_factor, lu_solve as _lu_back_substitute
from scipy.linalg import lapack

from .assembly import AssembledState, DiscreteSystem
from .haar import Resolution
from .problems import ProblemSpec

__all__ = [
    "SolverConfig",
    "SolveResult",
    "SingularJacobianError",
    "jacobian_fd",
    "lu_solve",
    "condition_estimate_1norm",
    "newton_solve",
]

_SQRT_EPS = float(np.sqrt(np.finfo(float).eps))


@dataclass(frozen=True)
class SolverConfig:
    """Newton iteration controls.

    tol is on the max norm of the residual.  fd_step_scale sets the forward
    difference increment h_i = fd_step_scale * (1 + |c_i|).  With damping
    enabled a step that fails to reduce the residual norm is halved up to
    max_halvings times before being accepted anyway.
    """

    tol: float = 1e-12
    max_iter: int = 50
    fd_step_scale: float = _SQRT_EPS
    damping: bool = False
    max_halvings: int = 20


class SingularJacobianError(np.linalg.LinAlgError):
    """LU factorization hit a numerically zero pivot; column is 0-based."""

    def __init__(self, column: int):
        super().__init__(f"matrix is singular to working precision at column {column}")
        self.column = column


def jacobian_fd(func: Callable, point: np.ndarray, step_scale: float = _SQRT_EPS) -> np.ndarray:
    """Forward difference Jacobian of a vector function at a point."""
    point = np.asarray(point, dtype=float)
    base = np.asarray(func(point), dtype=float)
    J = np.empty((base.size, point.size))
    for i in range(point.size):
        h = step_scale * (1.0 + abs(point[i]))
        shifted = point.copy()
        shifted[i] += h
        J[:, i] = (np.asarray(func(shifted), dtype=float) - base) / h
    return J


def _factor(A: np.ndarray):
    """LU factorization that raises SingularJacobianError on a zero pivot."""
    A = np.asarray(A, dtype=float)
    if not np.all(np.isfinite(A)):
        raise SingularJacobianError(int(np.argmax(~np.isfinite(A).all(axis=0))))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", LinAlgWarning)
        lu, piv = lu_factor(A)
    diag = np.abs(np.diag(lu))
    floor = A.shape[0] * np.finfo(float).eps * max(1.0, float(diag.max(initial=0.0)))
    if diag.size and float(diag.min()) <= floor:
        raise SingularJacobianError(int(np.argmin(diag)))
    return lu, piv


def lu_solve(A: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Solve A x = rhs by LU with partial pivoting.

    Raises SingularJacobianError naming the offending column when a pivot
    is exactly or numerically zero.
    """
    lu, piv = _factor(A)
    return _lu_back_substitute((lu, piv), np.asarray(rhs, dtype=float))


def condition_estimate_1norm(A: np.ndarray) -> float:
    """1-norm condition number estimate of A.

    Uses the standard reciprocal condition estimator on the LU factors;
    returns inf for singular input.
    """
    A = np.asarray(A, dtype=float)
    if not np.all(np.isfinite(A)):
        return float("inf")
    anorm = float(np.linalg.norm(A, 1))
    if anorm == 0.0:
        return float("inf")
    try:
        lu, _ = _factor(A)
    except SingularJacobianError:
        return float("inf")
    rcond, info = lapack.dgecon(lu, anorm, norm="1")
    if info != 0 or rcond <= 0.0:
        return float("inf")
    return 1.0 / float(rcond)


@dataclass(frozen=True)
class SolveResult:
    """Outcome of a Newton run.

    history holds the residual max norm before each update and after the
    last one, so its length is iterations + 1.  condition is the 1-norm
    condition estimate of the Jacobian at the final iterate.
    """

    state: AssembledState
    converged: bool
    iterations: int
    residual_norm: float
    condition: float
    history: list[float] = field(repr=False)
    message: str = ""

    @property
    def coeffs(self):
        return self.state.coeffs


def _norm(vector: np.ndarray) -> float:
    vector = np.asarray(vector)
    if not np.all(np.isfinite(vector)):
        return float("inf")
    return float(np.max(np.abs(vector))) if vector.size else 0.0


def newton_solve(
    spec: ProblemSpec,
    res: Resolution,
    config: Optional[SolverConfig] = None,
    start: Optional[np.ndarray] = None,
) -> SolveResult:
    """Solve the collocation equations from a zero (or given) start.

    The returned state is always usable for evaluation and reporting, even
    when the iteration failed to converge; check the converged flag.
    """
    if config is None:
        config = SolverConfig()
    system = DiscreteSystem(spec, res)
    if start is None:
        c = np.zeros(system.size)
    else:
        c = np.asarray(start, dtype=float).copy()
        if c.size != system.size:
            raise ValueError(f"start vector must have {system.size} entries, got {c.size}")

    F = system.residual(c)
    norm = _norm(F)
    history = [norm]
    iterations = 0
    message = ""

    while norm > config.tol and iterations < config.max_iter:
        if not np.isfinite(norm):
            message = "residual is not finite"
            break
        J = jacobian_fd(system.residual, c, config.fd_step_scale)
        try:
            lu, piv = _factor(J)
        except SingularJacobianError as exc:
            message = str(exc)
            break
        step = _lu_back_substitute((lu, piv), F)
        if config.damping:
            scale = 1.0
            for _ in range(config.max_halvings):
                trial = c - scale * step
                trial_norm = _norm(system.residual(trial))
                if trial_norm < norm:
                    break
                scale *= 0.5
            c = c - scale * step
        else:
            c = c - step
        F = system.residual(c)
        norm = _norm(F)
        history.append(norm)
        iterations += 1

    converged = bool(norm <= config.tol)
    if not converged and not message:
        message = f"no convergence within {config.max_iter} iterations"

    try:
        J_final = jacobian_fd(system.residual, c, config.fd_step_scale)
        cond = condition_estimate_1norm(J_final)
    except (SingularJacobianError, FloatingPointError):
        cond = float("inf")

    return SolveResult(
        state=system.state(c),
        converged=converged,
        iterations=iterations,
        residual_norm=norm,
        condition=cond,
        history=history,
        message=message,
    )
