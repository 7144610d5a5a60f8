"""Riemann-Liouville integrals and Caputo derivative helpers.

Closed forms only: the fractional integral of a Haar function is a short
combination of shifted power functions, and the Caputo derivative of the
linear part of a solution ansatz reduces to a single power of x.  No
quadrature happens anywhere in this module.
"""
from __future__ import annotations

import math

import numpy as np

from .haar import Resolution, breakpoints, collocation_points, decompose_index

__all__ = [
    "gamma",
    "rl_integral_monomial",
    "frac_integral_haar",
    "integration_matrix",
    "caputo_linear_term",
]


def gamma(x: float) -> float:
    """Gamma function for positive real arguments."""
    if x <= 0:
        raise ValueError(f"gamma is only evaluated for positive arguments, got {x!r}")
    return math.gamma(x)


def rl_integral_monomial(alpha: float, mu: float, x: float):
    """Riemann-Liouville integral of order alpha applied to t**mu at x.

    Equals gamma(mu + 1) / gamma(mu + alpha + 1) * x**(mu + alpha).
    Requires alpha > 0 and mu > -1 so the defining integral converges.
    """
    if alpha <= 0:
        raise ValueError(f"integral order must be positive, got {alpha!r}")
    if mu <= -1:
        raise ValueError(f"monomial exponent must exceed -1, got {mu!r}")
    coeff = gamma(mu + 1.0) / gamma(mu + alpha + 1.0)
    return coeff * _plus_pow(x, mu + alpha)


def _plus_pow(t, upsilon: float):
    """Truncated power (t)_+ ** upsilon, zero wherever t <= 0."""
    if np.ndim(t) == 0:
        t = float(t)
        return math.exp(upsilon * math.log(t)) if t > 0.0 else 0.0
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    mask = t > 0.0
    out[mask] = np.exp(upsilon * np.log(t[mask]))
    return out


def frac_integral_haar(upsilon: float, l: int, x):
    """Riemann-Liouville integral of order upsilon of the l-th Haar function.

    For the box function this is x**upsilon / gamma(upsilon + 1).  For l > 1
    with breakpoints v1 < v2 < v3 it is

        [(x - v1)_+**u - 2 (x - v2)_+**u + (x - v3)_+**u] / gamma(u + 1).

    Accepts scalar or array x and is exact up to rounding.
    """
    if upsilon <= 0:
        raise ValueError(f"integral order must be positive, got {upsilon!r}")
    g = gamma(upsilon + 1.0)
    if l == 1:
        return _plus_pow(x, upsilon) / g
    v = breakpoints(decompose_index(l))
    acc = _plus_pow(np.asarray(x, dtype=float) - v.v1, upsilon)
    acc = acc - 2.0 * _plus_pow(np.asarray(x, dtype=float) - v.v2, upsilon)
    acc = acc + _plus_pow(np.asarray(x, dtype=float) - v.v3, upsilon)
    if np.ndim(x) == 0:
        return float(acc) / g
    return acc / g


def integration_matrix(upsilon: float, res: Resolution) -> np.ndarray:
    """Matrix P with P[l-1, c-1] = (I^upsilon h_l) at the c-th collocation point."""
    pts = collocation_points(res)
    n = res.basis_size
    P = np.empty((n, n))
    for l in range(1, n + 1):
        P[l - 1] = frac_integral_haar(upsilon, l, pts)
    return P


def caputo_linear_term(beta: float, x):
    """Caputo derivative of order beta in (0, 1] of the function t -> t, at x.

    Equals x**(1 - beta) / gamma(2 - beta); the constant part of an affine
    function has Caputo derivative zero, so this is the whole derivative of
    c0 + c1 * t divided by c1.  At beta = 1 the value is exactly 1.
    """
    if not 0.0 < beta <= 1.0:
        raise ValueError(f"derivative order must lie in (0, 1], got {beta!r}")
    if beta == 1.0:
        if np.ndim(x) == 0:
            return 1.0
        return np.ones_like(np.asarray(x, dtype=float))
    return _plus_pow(x, 1.0 - beta) / gamma(2.0 - beta)
