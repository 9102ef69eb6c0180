"""
Multi-indices and monomials.

A multi-index is stored as a plain tuple of non-negative ints, one entry per
coordinate, so ``(2, 1)`` stands for the monomial ``x1**2 * x2``.  Enumeration
is graded: ascending total degree, and inside one degree the exponent of
``x1`` descends (then ``x2``, and so on).  In two dimensions the quadratic
block therefore reads ``x1**2, x1*x2, x2**2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

MultiIndex = tuple[int, ...]


@dataclass(frozen=True)
class Monomial:
    """A scaled monomial ``coefficient * x**index``."""

    index: MultiIndex
    coefficient: float = 1.0

    def __post_init__(self):
        if not math.isfinite(self.coefficient):
            raise ValueError("monomial coefficient must be finite")

    @property
    def is_zero(self) -> bool:
        return self.coefficient == 0.0

    def __call__(self, x) -> float:
        return self.coefficient * monomial_eval(x, self.index)


def as_multiindex(alpha: Sequence[int]) -> MultiIndex:
    """Validate and normalise ``alpha`` to a tuple of non-negative ints."""
    out = tuple(int(a) for a in alpha)
    if len(out) == 0:
        raise ValueError("multi-index must have at least one entry")
    if any(a < 0 for a in out):
        raise ValueError(f"multi-index entries must be non-negative, got {out}")
    if any(a != b for a, b in zip(out, alpha)):
        raise ValueError(f"multi-index entries must be integers, got {alpha}")
    return out


def degree(alpha: MultiIndex) -> int:
    return sum(alpha)


def count_multiindices(d: int, max_degree: int) -> int:
    """Number of multi-indices in ``d`` variables with total degree <= max_degree."""
    return math.comb(d + max_degree, d)


def _block(d: int, k: int) -> Iterator[MultiIndex]:
    # all exponents of total degree k, leading exponent descending
    if d == 1:
        yield (k,)
        return
    for first in range(k, -1, -1):
        for rest in _block(d - 1, k - first):
            yield (first,) + rest


def degree_block(d: int, k: int) -> list[MultiIndex]:
    """All multi-indices of total degree exactly ``k``, in enumeration order."""
    if d < 1:
        raise ValueError("dimension must be >= 1")
    if k < 0:
        raise ValueError("degree must be >= 0")
    return list(_block(d, k))


def enumerate_multiindices(d: int, max_degree: int) -> list[MultiIndex]:
    """Graded enumeration of every multi-index with ``|alpha| <= max_degree``.

    Parameters
    ----------
    d : int
        Ambient dimension, ``d >= 1``.
    max_degree : int
        Largest total degree included, ``>= 0``.

    Returns
    -------
    list of tuple
        ``C(d + max_degree, d)`` multi-indices, degree by degree.

    Examples
    --------
    >>> enumerate_multiindices(2, 2)
    [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]
    """
    if d < 1:
        raise ValueError("dimension must be >= 1")
    if max_degree < 0:
        raise ValueError("max_degree must be >= 0")
    out = []
    for k in range(max_degree + 1):
        out.extend(_block(d, k))
    return out


def monomial_eval(x, alpha: Sequence[int]) -> float:
    """Evaluate ``prod_j x_j**alpha_j`` at a single point (``0**0 == 1``)."""
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.shape[0] != len(alpha):
        raise ValueError(
            f"dimension mismatch: point has {x.shape[0]} coordinates, "
            f"multi-index has {len(alpha)}"
        )
    out = 1.0
    for xj, aj in zip(x, alpha):
        if aj:
            out *= float(xj) ** int(aj)
    return out


def monomial_matrix(points, indices: Sequence[MultiIndex]) -> np.ndarray:
    """Evaluate several monomials at several points.

    Returns an array of shape ``(len(indices), n_points)`` whose row ``i``
    holds ``x_k**indices[i]`` for every point ``x_k``.  This is the matrix
    the rank test builds row by row.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    n_pts, d = pts.shape
    out = np.ones((len(indices), n_pts))
    if not len(indices):
        return out
    top = max(max(a) for a in indices)
    # powers[p, k, j] = x_kj ** p, with 0**0 == 1
    powers = np.ones((top + 1, n_pts, d))
    for p in range(1, top + 1):
        powers[p] = powers[p - 1] * pts
    for i, alpha in enumerate(indices):
        if len(alpha) != d:
            raise ValueError(
                f"dimension mismatch: points are {d}-dimensional, "
                f"multi-index {alpha} is not"
            )
        for j, aj in enumerate(alpha):
            if aj:
                out[i] *= powers[aj, :, j]
    return out


def monomial_derivative(alpha: Sequence[int], beta: Sequence[int]) -> Monomial:
    """Formal derivative ``d^beta x^alpha``.

    The result is ``prod_j alpha_j! / (alpha_j - beta_j)!`` times
    ``x**(alpha - beta)``, or the zero monomial (coefficient 0, all-zero
    index) as soon as some ``beta_j > alpha_j``.
    """
    if len(alpha) != len(beta):
        raise ValueError(
            f"dimension mismatch: {len(alpha)} vs {len(beta)} entries"
        )
    alpha = as_multiindex(alpha)
    beta = as_multiindex(beta)
    if any(b > a for a, b in zip(alpha, beta)):
        return Monomial((0,) * len(alpha), 0.0)
    coef = 1
    for a, b in zip(alpha, beta):
        coef *= math.perm(a, b)
    return Monomial(tuple(a - b for a, b in zip(alpha, beta)), float(coef))


def derivative_matrix(x, indices: Sequence[MultiIndex], beta: Sequence[int]) -> np.ndarray:
    """Vector of ``d^beta x^alpha`` evaluated at ``x`` for every alpha in ``indices``."""
    out = np.empty(len(indices))
    for i, alpha in enumerate(indices):
        m = monomial_derivative(alpha, beta)
        out[i] = 0.0 if m.is_zero else m(x)
    return out


def format_monomial(alpha: MultiIndex) -> str:
    """Human readable form, e.g. ``(2, 1) -> 'x1^2 x2'`` and ``(0, 0) -> '1'``."""
    parts = []
    for j, a in enumerate(alpha, start=1):
        if a == 1:
            parts.append(f"x{j}")
        elif a > 1:
            parts.append(f"x{j}^{a}")
    return " ".join(parts) if parts else "1"
