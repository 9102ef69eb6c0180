"""
Least-squares fits, interpolation weights and derivative stencils.

With an orthonormal basis the weighted least-squares coefficients are plain
projections, ``c_i = sum_j f_j w_j P_i(x_j)``, and every linear functional of
the fit (its value or a derivative at a point) is a fixed weighted sum of the
data.  Those weights are what :class:`Stencil` stores.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .basis import (
    MonomialBasis,
    SelectionConfig,
    check_derivative_completeness,
)
from .mindex import MultiIndex, as_multiindex, format_monomial
from .orthogonalize import OrthonormalBasis, build_orthonormal_basis
from .pointset import PointSet, ScaleFrame, make_pointset, nearest_indices


class IncompleteDerivativeWarning(UserWarning):
    """The basis lacks monomials needed to isolate the requested derivative,
    so the estimate is really a combination of several derivatives."""


@dataclass(frozen=True)
class FitCoefficients:
    c: np.ndarray

    def __len__(self) -> int:
        return self.c.shape[0]


@dataclass(frozen=True, eq=False)
class Stencil:
    """Per-node weights for one linear functional at ``eval_point``.

    ``derivative`` is all zeros for interpolation.  ``frame`` is the
    normalising frame the weights were computed in; the weights themselves
    already refer to original coordinates.
    """

    node_weights: np.ndarray
    derivative: MultiIndex
    eval_point: np.ndarray
    frame: ScaleFrame
    nodes: np.ndarray = field(repr=False)

    def __len__(self) -> int:
        return self.node_weights.shape[0]

    def apply(self, f_values) -> float:
        f = np.asarray(f_values, dtype=float)
        if f.shape != self.node_weights.shape:
            raise ValueError(f"expected {len(self)} values, got {f.shape}")
        return float(self.node_weights @ f)


def _values(ob: OrthonormalBasis, f_values) -> np.ndarray:
    f = np.asarray(f_values, dtype=float).reshape(-1)
    if f.shape[0] != ob.pointset.n:
        raise ValueError(f"expected {ob.pointset.n} values, got {f.shape[0]}")
    if not np.all(np.isfinite(f)):
        raise ValueError("function values must be finite")
    return f


def _point(ob: OrthonormalBasis, x) -> np.ndarray:
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.shape[0] != ob.pointset.dim:
        raise ValueError(
            f"dimension mismatch: point has {x.shape[0]} coordinates, "
            f"basis is {ob.pointset.dim}-dimensional"
        )
    return x


def fit_coefficients(ob: OrthonormalBasis, f_values) -> FitCoefficients:
    """Projection coefficients ``c_i = <f, P_i>``."""
    f = _values(ob, f_values)
    return FitCoefficients(ob.node_values() @ (f * ob.pointset.weights))


def evaluate_fit(ob: OrthonormalBasis, c: FitCoefficients, x) -> float:
    """Value of ``sum_i c_i P_i`` at ``x``."""
    return float(np.dot(c.c, ob(_point(ob, x))))


def interpolation_weights(ob: OrthonormalBasis, x) -> Stencil:
    """Weights ``v_j = w_j sum_i P_i(x_j) P_i(x)`` reproducing the fit at ``x``."""
    x = _point(ob, x)
    v = ob.pointset.weights * (ob(x) @ ob.node_values())
    return Stencil(v, (0,) * x.shape[0], x, ob.frame, ob.pointset.points)


def derivative_stencil(ob: OrthonormalBasis, x, beta) -> Stencil:
    """Weights ``v_j = w_j sum_i P_i(x_j) d^beta P_i(x)``.

    Derivatives are taken with respect to original coordinates: weights built
    in the normalised frame are multiplied by ``scale**-|beta|``.  When no
    accepted monomial survives differentiation the weights are all zero,
    which is the true derivative of the fitted polynomial.
    """
    x = _point(ob, x)
    beta = as_multiindex(beta)
    if len(beta) != x.shape[0]:
        raise ValueError("dimension mismatch between beta and the point")
    v = ob.pointset.weights * (ob.derivative(x, beta) @ ob.node_values())
    return Stencil(v, beta, x, ob.frame, ob.pointset.points)


def stencil(ob: OrthonormalBasis, x, beta=None) -> Stencil:
    """Interpolation stencil when ``beta`` is ``None`` or all zeros, else a
    derivative stencil."""
    if beta is None or not any(beta):
        return interpolation_weights(ob, x)
    return derivative_stencil(ob, x, beta)


@dataclass
class Diagnostics:
    """What the end-to-end estimator did."""

    accepted: tuple[MultiIndex, ...]
    rejected: tuple[MultiIndex, ...]
    missing: list[MultiIndex]
    n_points: int
    frame: ScaleFrame
    messages: list[str] = field(default_factory=list)

    @property
    def complete(self) -> bool:
        return not self.missing

    @property
    def n_rejected(self) -> int:
        return len(self.rejected)


@dataclass
class Estimate:
    value: float
    stencil: Stencil
    basis: OrthonormalBasis = field(repr=False)
    diagnostics: Diagnostics = field(repr=False)

    def __float__(self) -> float:
        return self.value


def completeness_messages(basis: MonomialBasis, order: int) -> list[str]:
    missing = check_derivative_completeness(basis, order)
    if not missing:
        return []
    names = ", ".join(format_monomial(a) for a in missing)
    return [
        f"basis lacks {names}: order-{order} derivatives are only available "
        "as linear combinations"
    ]


def estimate_derivative(
    points: PointSet,
    f_values,
    x0,
    beta,
    config: SelectionConfig | None = None,
    n_neighbors: int | None = None,
) -> Estimate:
    """Estimate ``d^beta f(x0)`` from samples of ``f`` at ``points``.

    Steps: take the ``n_neighbors`` points nearest ``x0`` (all of them by
    default), build orthonormal polynomials in a frame centred on ``x0``,
    form the stencil and apply it.  ``beta`` may be all zeros for plain
    interpolation.

    A :class:`IncompleteDerivativeWarning` is issued when the accepted
    monomials do not include every monomial up to ``|beta|``.
    """
    if not isinstance(points, PointSet):
        points = make_pointset(points)
    f = np.asarray(f_values, dtype=float).reshape(-1)
    if f.shape[0] != points.n:
        raise ValueError(f"expected {points.n} values, got {f.shape[0]}")
    x0 = np.asarray(x0, dtype=float).reshape(-1)
    beta = as_multiindex(beta)
    if len(beta) != points.dim:
        raise ValueError("dimension mismatch between beta and the points")

    if n_neighbors is not None:
        order = nearest_indices(points, x0, n_neighbors)
        local_pts = points.subset(order)
        f = f[order]
    else:
        local_pts = points

    ob = build_orthonormal_basis(local_pts, config, center=x0)
    st = stencil(ob, x0, beta)
    k = sum(beta)
    missing = check_derivative_completeness(ob.basis, k)
    msgs = completeness_messages(ob.basis, k)
    for m in msgs:
        warnings.warn(m, IncompleteDerivativeWarning, stacklevel=2)
    if ob.basis.diagnostic:
        msgs.append(ob.basis.diagnostic)
    diag = Diagnostics(
        accepted=ob.basis.accepted,
        rejected=ob.basis.rejected,
        missing=missing,
        n_points=local_pts.n,
        frame=ob.frame,
        messages=msgs,
    )
    return Estimate(st.apply(f), st, ob, diag)


def format_stencil_csv(st: Stencil, n_points: int | None = None) -> str:
    """Stencil export: a commented header then ``index, coordinates, weight``.

    All numbers are written with 17 significant digits.
    """
    d = st.eval_point.shape[0]
    x0 = " ".join(f"{v:.17g}" for v in st.eval_point)
    beta = ",".join(str(b) for b in st.derivative)
    n = len(st) if n_points is None else n_points
    lines = [
        f"# eval_point={x0}",
        f"# beta={beta}",
        f"# sigma={st.frame.scale:.17g}",
        f"# N={n}",
        ",".join(["index"] + [f"x{j + 1}" for j in range(d)] + ["weight"]),
    ]
    for j, (p, v) in enumerate(zip(st.nodes, st.node_weights)):
        lines.append(",".join([str(j)] + [f"{c:.17g}" for c in p] + [f"{v:.17g}"]))
    return "\n".join(lines) + "\n"
