"""Haar wavelet basis on the unit interval.

The basis at resolution J has 2M members with M = 2**J.  The first member
is the box function (constant 1 on [0, 1)).  Member l > 1 encodes a dyadic
level j and a shift k through l = m + k + 1 with m = 2**j, and takes the
values +1 and -1 on the two halves of its support.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Resolution",
    "WaveletIndex",
    "Breakpoints",
    "decompose_index",
    "recompose_index",
    "breakpoints",
    "haar_eval",
    "collocation_points",
    "haar_matrix",
    "pairwise_inner_product",
]


@dataclass(frozen=True)
class Resolution:
    """Maximal dyadic level J of a truncated Haar expansion.

    M = 2**J and the expansion carries 2M coefficients per unknown.
    """

    J: int
    M: int = field(init=False)
    basis_size: int = field(init=False)

    def __post_init__(self) -> None:
        if not isinstance(self.J, int) or self.J < 0:
            raise ValueError(f"resolution J must be a non-negative integer, got {self.J!r}")
        object.__setattr__(self, "M", 2**self.J)
        object.__setattr__(self, "basis_size", 2 * self.M)


@dataclass(frozen=True)
class WaveletIndex:
    """Serial index l with its dyadic decomposition l = 2**j + k + 1."""

    l: int
    j: int
    k: int

    @property
    def m(self) -> int:
        return 2**self.j


@dataclass(frozen=True)
class Breakpoints:
    """Support endpoints and midpoint of a single wavelet."""

    v1: float
    v2: float
    v3: float


def decompose_index(l: int) -> WaveletIndex:
    """Split a serial index l >= 2 into its level j and shift k.

    j is the largest integer with 2**j < l, and k = l - 2**j - 1 so that
    0 <= k < 2**j.
    """
    if not isinstance(l, (int, np.integer)) or l < 2:
        raise ValueError(f"serial index must be an integer >= 2, got {l!r}")
    j = int(l - 1).bit_length() - 1
    k = l - 2**j - 1
    return WaveletIndex(l=int(l), j=j, k=int(k))


def recompose_index(j: int, k: int) -> int:
    """Inverse of decompose_index: serial index of the (j, k) wavelet."""
    if j < 0 or not 0 <= k < 2**j:
        raise ValueError(f"invalid wavelet address j={j}, k={k}")
    return 2**j + k + 1


def breakpoints(idx: WaveletIndex) -> Breakpoints:
    """Left endpoint, sign-change point and right endpoint of wavelet idx."""
    m = idx.m
    return Breakpoints(
        v1=idx.k / m,
        v2=(2 * idx.k + 1) / (2 * m),
        v3=(idx.k + 1) / m,
    )


def haar_eval(l: int, x):
    """Evaluate the l-th Haar function at x (scalar or array).

    The box function (l = 1) is 1 on [0, 1) and 0 at x = 1.  For l > 1 the
    wavelet is +1 on [v1, v2), -1 on [v2, v3) and 0 elsewhere, so every
    member vanishes at x = 1.
    """
    if l == 1:
        if np.ndim(x) == 0:
            return 1.0 if 0.0 <= x < 1.0 else 0.0
        x = np.asarray(x, dtype=float)
        return np.where((x >= 0.0) & (x < 1.0), 1.0, 0.0)
    v = breakpoints(decompose_index(l))
    if np.ndim(x) == 0:
        if v.v1 <= x < v.v2:
            return 1.0
        if v.v2 <= x < v.v3:
            return -1.0
        return 0.0
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    out[(x >= v.v1) & (x < v.v2)] = 1.0
    out[(x >= v.v2) & (x < v.v3)] = -1.0
    return out


def collocation_points(res: Resolution) -> np.ndarray:
    """Midpoints of the 2M uniform cells: (c - 1/2) / (2M) for c = 1..2M."""
    n = res.basis_size
    return (np.arange(1, n + 1) - 0.5) / n


def haar_matrix(res: Resolution) -> np.ndarray:
    """Matrix H with H[l-1, c-1] = h_l evaluated at the c-th collocation point.

    Each collocation point falls strictly inside a constant piece of every
    basis member, so H is well defined and invertible.
    """
    pts = collocation_points(res)
    n = res.basis_size
    H = np.empty((n, n))
    for l in range(1, n + 1):
        H[l - 1] = haar_eval(l, pts)
    return H


def _pieces(l: int) -> list[tuple[float, float, float]]:
    """Constant pieces of h_l as (left, right, value) with value != 0."""
    if l == 1:
        return [(0.0, 1.0, 1.0)]
    v = breakpoints(decompose_index(l))
    return [(v.v1, v.v2, 1.0), (v.v2, v.v3, -1.0)]


def pairwise_inner_product(l: int, r: int) -> float:
    """Integral of h_l * h_r over [0, 1] by exact interval overlap.

    Distinct members are orthogonal; the squared norm of member l > 1 at
    level j is 2**(-j).
    """
    total = 0.0
    for a1, b1, s1 in _pieces(l):
        for a2, b2, s2 in _pieces(r):
            overlap = min(b1, b2) - max(a1, a2)
            if overlap > 0:
                total += s1 * s2 * overlap
    return total
