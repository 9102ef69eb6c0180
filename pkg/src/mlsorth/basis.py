"""
Rank-checked selection of the monomials that span polynomials on a point set.

Candidates are visited in graded order starting from the constant.  Each
candidate contributes the row ``(x_1**a, ..., x_N**a)``; it is kept when that
row is not (numerically) a combination of the rows already kept.  Points on a
line, a circle or any other algebraic set therefore lose exactly the
monomials the set cannot distinguish, instead of producing a singular fit.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from .mindex import (
    MultiIndex,
    as_multiindex,
    degree_block,
    format_monomial,
    monomial_matrix,
)
from .pointset import PointSet, ScaleFrame, normalizing_frame

DEFAULT_RANK_TOL = 1e-8
# Polynomials held as monomial coefficients evaluate with error of roughly
# cond(X) * eps, and the Gram matrix squares cond(X); keeping cond(X) below
# 1e6 keeps both the LDL factorisation and the Gram identity safe.
DEFAULT_CONDITION_FLOOR = 1e-6


class IncompleteBasisWarning(UserWarning):
    """Raised as a warning when the requested stop rule could not be met."""


@dataclass(frozen=True)
class SelectionConfig:
    """How far to walk the monomial enumeration and how to test rank.

    ``stop`` is one of

    * ``"square"``: keep going until there are as many monomials as points;
    * ``"degree"``: test every monomial up to ``max_degree``;
    * ``"count"``: stop once ``max_count`` monomials are accepted.

    With every rule, no more than ``N`` monomials can ever be accepted.

    ``condition_floor`` is a second, global test: a candidate is also
    rejected if accepting it would bring ``s_min / s_max`` of the accepted
    evaluation matrix down to the floor or below.  It is independent of
    ``rank_tolerance``, which only judges each candidate against the rows
    already accepted.
    """

    rank_tolerance: float = DEFAULT_RANK_TOL
    stop: str = "square"
    max_degree: int | None = None
    max_count: int | None = None
    normalize: bool = True
    condition_floor: float = DEFAULT_CONDITION_FLOOR

    def __post_init__(self):
        if not self.rank_tolerance > 0:
            raise ValueError("rank_tolerance must be positive")
        if not 0 <= self.condition_floor < 1:
            raise ValueError("condition_floor must lie in [0, 1)")
        if self.stop not in ("square", "degree", "count"):
            raise ValueError(f"unknown stop rule {self.stop!r}")
        if self.stop == "degree" and (self.max_degree is None or self.max_degree < 0):
            raise ValueError("stop='degree' needs max_degree >= 0")
        if self.stop == "count" and (self.max_count is None or self.max_count < 1):
            raise ValueError("stop='count' needs max_count >= 1")

    @classmethod
    def square(cls, **kw) -> "SelectionConfig":
        return cls(stop="square", **kw)

    @classmethod
    def order(cls, k: int, **kw) -> "SelectionConfig":
        return cls(stop="degree", max_degree=k, **kw)

    @classmethod
    def count(cls, n: int, **kw) -> "SelectionConfig":
        return cls(stop="count", max_count=n, **kw)


@dataclass(frozen=True, eq=False)
class MonomialBasis:
    """Accepted and rejected monomials for one point set.

    Attributes
    ----------
    accepted, rejected : tuple of MultiIndex
        In the order they were tested.
    residuals : dict
        Relative residual of every tested monomial at the time it was tested.
    frame : ScaleFrame
        Coordinates the rank test (and everything downstream) ran in.
    pointset_fingerprint : str
        :attr:`PointSet.fingerprint` of the points the basis belongs to.
    diagnostic : str
        Empty unless the stop rule could not be satisfied.
    """

    accepted: tuple[MultiIndex, ...]
    rejected: tuple[MultiIndex, ...]
    residuals: dict = field(repr=False)
    frame: ScaleFrame = field(repr=False)
    pointset_fingerprint: str = ""
    config: SelectionConfig = field(default_factory=SelectionConfig, repr=False)
    diagnostic: str = ""

    @property
    def n(self) -> int:
        return len(self.accepted)

    @property
    def dim(self) -> int:
        return len(self.accepted[0])

    @property
    def tested(self) -> list[MultiIndex]:
        """Every tested monomial, in enumeration order."""
        return sorted(self.residuals, key=_grlex_position)

    def describe(self) -> str:
        acc = ", ".join(format_monomial(a) for a in self.accepted)
        rej = ", ".join(format_monomial(a) for a in self.rejected) or "none"
        return f"accepted: {acc}\nrejected: {rej}"


def _grlex_position(alpha: MultiIndex):
    return (sum(alpha),) + tuple(-a for a in alpha)


def _candidates(d: int, max_degree: int) -> Iterator[MultiIndex]:
    for k in range(max_degree + 1):
        yield from degree_block(d, k)


class _RowSpace:
    """Orthonormal basis of the span of the accepted rows (as columns).

    Classical Gram-Schmidt with one re-orthogonalisation pass, which keeps
    the computed residual accurate to roughly machine precision relative to
    the candidate norm.  The triangular factor ``t`` (``X^T = Q t``) is kept
    so the singular values of the accepted matrix are available cheaply.
    """

    def __init__(self, n_points: int):
        self.q = np.empty((n_points, 0))
        self.t = np.empty((0, 0))

    def residual(self, v: np.ndarray) -> tuple[float, np.ndarray, np.ndarray]:
        r = v.copy()
        proj = np.zeros(self.q.shape[1])
        for _ in range(2):
            c = self.q.T @ r
            r -= self.q @ c
            proj += c
        return float(np.linalg.norm(r)), r, proj

    def _extended(self, proj: np.ndarray, norm: float) -> np.ndarray:
        k = self.t.shape[0]
        t = np.zeros((k + 1, k + 1))
        t[:k, :k] = self.t
        t[:k, k] = proj
        t[k, k] = norm
        return t

    def condition_with(self, proj: np.ndarray, norm: float) -> float:
        """``s_min / s_max`` of the accepted matrix extended by one row."""
        sv = np.linalg.svd(self._extended(proj, norm), compute_uv=False)
        return float(sv[-1] / sv[0])

    def add(self, r: np.ndarray, norm: float, proj: np.ndarray) -> None:
        self.t = self._extended(proj, norm)
        self.q = np.column_stack([self.q, r / norm])


def _test_candidate(space: _RowSpace, v: np.ndarray, tol: float, floor: float):
    """Relative residual of ``v`` and whether it passes both tests."""
    vnorm = float(np.linalg.norm(v))
    rnorm, r, proj = space.residual(v)
    rel = rnorm / vnorm if vnorm > 0 else 0.0
    ok = rel > tol and space.condition_with(proj, rnorm) > floor
    return rel, ok, r, rnorm, proj


def select_basis(
    points: PointSet, config: SelectionConfig | None = None, frame: ScaleFrame | None = None
) -> MonomialBasis:
    """Pick the monomials that span polynomials on ``points``.

    Parameters
    ----------
    points : PointSet
    config : SelectionConfig, optional
        Defaults to the square rule with ``rank_tolerance=1e-8``.
    frame : ScaleFrame, optional
        Local coordinates for the test.  When omitted and
        ``config.normalize`` is set, points are scaled into the unit ball
        about the origin; with ``normalize=False`` raw coordinates are used.

    Returns
    -------
    MonomialBasis

    Notes
    -----
    A candidate with row ``v`` is accepted when the part of ``v`` orthogonal
    to the rows already accepted has norm greater than
    ``rank_tolerance * |v|`` and the accepted matrix stays above the
    condition floor.  The constant row is never zero, so at least one
    monomial is always accepted.
    """
    config = config or SelectionConfig()
    d, n_pts = points.dim, points.n
    if frame is None:
        frame = normalizing_frame(points) if config.normalize else ScaleFrame.identity(d)
    local = frame.to_local(points.points)

    if config.stop == "degree":
        max_deg, target = config.max_degree, n_pts
    elif config.stop == "count":
        # a polynomial of degree N-1 separates any N distinct points
        max_deg, target = max(n_pts - 1, 0), min(config.max_count, n_pts)
    else:
        max_deg, target = max(n_pts - 1, 0), n_pts

    floor = config.condition_floor
    space = _RowSpace(n_pts)
    accepted, rejected, residuals = [], [], {}
    for alpha in _candidates(d, max_deg):
        if config.stop != "degree" and len(accepted) >= target:
            break
        v = monomial_matrix(local, [alpha])[0]
        rel, ok, r, rnorm, proj = _test_candidate(space, v, config.rank_tolerance, floor)
        residuals[alpha] = rel
        if len(accepted) < n_pts and ok:
            space.add(r, rnorm, proj)
            accepted.append(alpha)
        else:
            rejected.append(alpha)

    diagnostic = ""
    if config.stop != "degree" and len(accepted) < target:
        diagnostic = (
            f"enumeration exhausted at degree {max_deg}: {len(accepted)} of "
            f"{target} monomials accepted (coincident points, or the remaining "
            "monomials are dependent or too ill-conditioned on these points)"
        )
        warnings.warn(diagnostic, IncompleteBasisWarning, stacklevel=2)

    return MonomialBasis(
        accepted=tuple(accepted),
        rejected=tuple(rejected),
        residuals=residuals,
        frame=frame,
        pointset_fingerprint=points.fingerprint,
        config=config,
        diagnostic=diagnostic,
    )


def basis_from_monomials(
    points: PointSet,
    indices,
    rank_tolerance: float = DEFAULT_RANK_TOL,
    frame: ScaleFrame | None = None,
) -> MonomialBasis:
    """Rank-check a caller-chosen list of monomials, in the given order.

    Useful for controlled comparisons, e.g. the same fit with and without one
    particular term.  Dependent entries are rejected exactly as in
    :func:`select_basis`.
    """
    config = SelectionConfig(rank_tolerance=rank_tolerance)
    floor = config.condition_floor
    if frame is None:
        frame = normalizing_frame(points)
    local = frame.to_local(points.points)
    space = _RowSpace(points.n)
    accepted, rejected, residuals = [], [], {}
    for alpha in indices:
        alpha = as_multiindex(alpha)
        if len(alpha) != points.dim:
            raise ValueError(f"monomial {alpha} does not match dimension {points.dim}")
        if alpha in residuals:
            raise ValueError(f"monomial {alpha} listed twice")
        v = monomial_matrix(local, [alpha])[0]
        rel, ok, r, rnorm, proj = _test_candidate(space, v, rank_tolerance, floor)
        residuals[alpha] = rel
        if len(accepted) < points.n and ok:
            space.add(r, rnorm, proj)
            accepted.append(alpha)
        else:
            rejected.append(alpha)
    if not accepted:
        raise ValueError("no monomial could be accepted")
    return MonomialBasis(
        accepted=tuple(accepted),
        rejected=tuple(rejected),
        residuals=residuals,
        frame=frame,
        pointset_fingerprint=points.fingerprint,
        config=config,
    )


def check_derivative_completeness(basis: MonomialBasis, order: int) -> list[MultiIndex]:
    """Monomials of degree ``<= order`` missing from ``basis.accepted``.

    An empty list means every derivative of that order can be estimated on
    its own rather than as a combination with others.
    """
    if order < 0:
        raise ValueError("order must be >= 0")
    have = set(basis.accepted)
    return [a for a in _candidates(basis.dim, order) if a not in have]


def is_complete(basis: MonomialBasis, order: int) -> bool:
    return not check_derivative_completeness(basis, order)


def complete_order(basis: MonomialBasis) -> int:
    """Largest ``k`` such that every monomial of degree ``<= k`` was accepted."""
    k = -1
    while is_complete(basis, k + 1) and k + 1 <= max(sum(a) for a in basis.accepted):
        k += 1
    return k


def format_basis_dump(basis: MonomialBasis) -> str:
    """Diagnostic dump: one line per tested monomial.

    Columns are the exponents, ``A`` (accepted) or ``R`` (rejected), and the
    relative residual at test time.
    """
    d = basis.dim
    head = " ".join(f"a{j + 1}" for j in range(d))
    lines = [f"# {head} status residual"]
    acc = set(basis.accepted)
    for alpha in basis.tested:
        flag = "A" if alpha in acc else "R"
        exps = " ".join(str(a) for a in alpha)
        lines.append(f"{exps} {flag} {basis.residuals[alpha]:.17g}")
    return "\n".join(lines) + "\n"


def parse_multiindex(text: str) -> MultiIndex:
    """Parse ``"1,0"`` or ``"1 0"`` into ``(1, 0)``."""
    parts = text.replace(",", " ").split()
    return as_multiindex([int(p) for p in parts])
