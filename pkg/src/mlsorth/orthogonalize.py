"""
Discrete orthonormal polynomials on a weighted point set.

Given accepted monomials ``m_1 .. m_n`` the Gram matrix
``M_ij = <m_i, m_j>`` is factored as ``M = S D S^T`` (``S`` unit lower
triangular, ``D`` diagonal).  The lower-triangular coefficient matrix
``R = D^{-1/2} S^{-1}`` then gives polynomials ``P_i = sum_j R_ij m_j`` with
``R M R^T = I``.  All of this happens in the normalised frame stored on the
basis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_triangular

from .basis import MonomialBasis, SelectionConfig, select_basis
from .mindex import MultiIndex, derivative_matrix, monomial_matrix
from .pointset import PointSet, ScaleFrame, normalizing_frame


class NonPositivePivotError(np.linalg.LinAlgError):
    """The Gram matrix is not numerically positive definite.

    Usually means the rank tolerance used to select the monomials was too
    loose for the point set.
    """

    def __init__(self, index: int, pivot: float):
        self.index = index
        self.pivot = pivot
        super().__init__(
            f"non-positive pivot {pivot:.3e} at index {index}; "
            "try a larger rank tolerance"
        )


def inner(points: PointSet, f, g) -> float:
    """Discrete inner product ``sum_k f_k g_k w_k``."""
    return float(np.sum(np.asarray(f) * np.asarray(g) * points.weights))


def gram_matrix(points: PointSet, basis: MonomialBasis) -> np.ndarray:
    """``M_ij = sum_k x_k^a_i x_k^a_j w_k`` in the basis frame."""
    _check_binding(points, basis)
    local = basis.frame.to_local(points.points)
    x = monomial_matrix(local, basis.accepted)
    m = (x * points.weights) @ x.T
    return 0.5 * (m + m.T)


def ldl_decompose(m) -> tuple[np.ndarray, np.ndarray]:
    """Factor a symmetric positive definite matrix as ``S diag(D) S^T``.

    Returns
    -------
    S : ndarray, shape (n, n)
        Unit lower-triangular.
    D : ndarray, shape (n,)
        Positive pivots.

    Raises
    ------
    NonPositivePivotError
        On the first pivot that is not strictly positive.
    """
    m = np.asarray(m, dtype=float)
    n = m.shape[0]
    if m.shape != (n, n):
        raise ValueError("matrix must be square")
    s = np.eye(n)
    dvec = np.zeros(n)
    for j in range(n):
        sj = s[j, :j]
        dj = m[j, j] - np.dot(sj * sj, dvec[:j])
        if not dj > 0.0:
            raise NonPositivePivotError(j, float(dj))
        dvec[j] = dj
        if j + 1 < n:
            s[j + 1 :, j] = (m[j + 1 :, j] - s[j + 1 :, :j] @ (sj * dvec[:j])) / dj
    return s, dvec


@dataclass(frozen=True, eq=False)
class OrthonormalBasis:
    """Polynomials ``P_i(x) = sum_j coeffs[i, j] * u**accepted[j]`` where
    ``u = frame.to_local(x)``.

    ``coeffs`` is lower triangular with a positive diagonal.
    """

    coeffs: np.ndarray
    basis: MonomialBasis
    pointset: PointSet = field(repr=False)

    @property
    def frame(self) -> ScaleFrame:
        return self.basis.frame

    @property
    def n(self) -> int:
        return self.coeffs.shape[0]

    @property
    def accepted(self) -> tuple[MultiIndex, ...]:
        return self.basis.accepted

    def node_values(self) -> np.ndarray:
        """``P_i(x_k)`` for every basis polynomial and node, shape ``(n, N)``."""
        local = self.frame.to_local(self.pointset.points)
        return self.coeffs @ monomial_matrix(local, self.accepted)

    def __call__(self, x) -> np.ndarray:
        """Values ``P_i(x)`` at one point (shape ``(n,)``) or many (``(n, m)``)."""
        x = np.asarray(x, dtype=float)
        pts = np.atleast_2d(x)
        vals = self.coeffs @ monomial_matrix(self.frame.to_local(pts), self.accepted)
        return vals[:, 0] if x.ndim == 1 else vals

    def derivative(self, x, beta) -> np.ndarray:
        """``d^beta P_i`` at ``x`` with respect to the original coordinates."""
        u = self.frame.to_local(np.asarray(x, dtype=float).reshape(-1))
        dm = derivative_matrix(u, self.accepted, beta)
        return (self.coeffs @ dm) * self.frame.scale ** (-float(sum(beta)))

    def gram(self) -> np.ndarray:
        """Discrete Gram matrix of the polynomials, computed from node values."""
        v = self.node_values()
        return (v * self.pointset.weights) @ v.T

    def expand(self) -> list[dict[MultiIndex, float]]:
        """Each ``P_i`` as ``{multi-index: coefficient}`` in original coordinates."""
        return [_expand(row, self.accepted, self.frame) for row in self.coeffs]


def _expand(row, indices, frame: ScaleFrame) -> dict[MultiIndex, float]:
    # prod_k ((x_k - c_k) / s)**a_k, multiplied out binomially
    out: dict[MultiIndex, float] = {}
    for coef, alpha in zip(row, indices):
        if coef == 0.0:
            continue
        terms = {(): coef * frame.scale ** (-float(sum(alpha)))}
        for a, c in zip(alpha, frame.center):
            nxt = {}
            for t in range(a + 1):
                f = math.comb(a, t) * (-c) ** (a - t)
                if f == 0.0:
                    continue
                for key, val in terms.items():
                    k2 = key + (t,)
                    nxt[k2] = nxt.get(k2, 0.0) + val * f
            terms = nxt
        for key, val in terms.items():
            out[key] = out.get(key, 0.0) + val
    return out


def _check_binding(points: PointSet, basis: MonomialBasis) -> None:
    if basis.pointset_fingerprint and basis.pointset_fingerprint != points.fingerprint:
        raise ValueError("basis was built on a different point set")


def _lower_inverse_sqrt(s: np.ndarray, dvec: np.ndarray) -> np.ndarray:
    # R = D^{-1/2} S^{-1}, obtained by solving S^T R^T = D^{-1/2}
    rt = solve_triangular(s.T, np.diag(dvec ** -0.5), lower=False, unit_diagonal=True)
    return np.tril(rt.T)


def orthonormal_coefficients(
    s: np.ndarray, dvec: np.ndarray, points: PointSet, basis: MonomialBasis,
    refine: bool = True,
) -> OrthonormalBasis:
    """Turn the ``S D S^T`` factors into orthonormal polynomial coefficients.

    Each row is finally rescaled so that ``<P_i, P_i> = 1`` on the data.
    With ``refine`` (the default) one more factor-and-solve sweep is applied
    to the Gram matrix of the polynomials themselves, evaluated from node
    values.  The sweep keeps ``R`` lower triangular and removes the loss of
    orthogonality that comes from squaring the condition number in ``M``.
    """
    _check_binding(points, basis)
    r = _lower_inverse_sqrt(s, dvec)
    local = basis.frame.to_local(points.points)
    x = monomial_matrix(local, basis.accepted)
    w = points.weights
    if refine:
        v = r @ x
        g = (v * w) @ v.T
        s2, d2 = ldl_decompose(0.5 * (g + g.T))
        r = np.tril(_lower_inverse_sqrt(s2, d2) @ r)
    v = r @ x
    norms = np.sqrt(np.sum(v * v * w, axis=1))
    if np.any(~(norms > 0)):
        raise ZeroDivisionError("orthogonal polynomial with vanishing norm")
    r = r / norms[:, None]
    return OrthonormalBasis(r, basis, points)


def build_orthonormal_basis(
    points: PointSet,
    config: SelectionConfig | None = None,
    center=None,
    refine: bool = True,
) -> OrthonormalBasis:
    """Select monomials, factor the Gram matrix and normalise, in one call.

    Parameters
    ----------
    points : PointSet
    config : SelectionConfig, optional
        Stop rule and rank tolerance (square rule, ``1e-8`` by default).
    center : array_like, optional
        Centre of the normalising frame, usually the evaluation point.
        Defaults to the origin.  Ignored when ``config.normalize`` is off.
    refine : bool
        See :func:`orthonormal_coefficients`.
    """
    config = config or SelectionConfig()
    if config.normalize:
        frame = normalizing_frame(points, center)
    else:
        frame = ScaleFrame.identity(points.dim)
    basis = select_basis(points, config, frame)
    m = gram_matrix(points, basis)
    s, dvec = ldl_decompose(m)
    return orthonormal_coefficients(s, dvec, points, basis, refine=refine)


def format_coefficients_csv(ob: OrthonormalBasis) -> str:
    """Export ``R`` and the accepted exponents as CSV, 17 significant digits.

    Header row: ``poly`` then one column per accepted monomial named by its
    exponents (``a1:a2:...``).  A leading comment records the frame.
    """
    cols = ["poly"] + [":".join(str(a) for a in alpha) for alpha in ob.accepted]
    c = " ".join(f"{v:.17g}" for v in ob.frame.center)
    lines = [f"# frame center={c} scale={ob.frame.scale:.17g}", ",".join(cols)]
    for i, row in enumerate(ob.coeffs):
        lines.append(",".join([str(i)] + [f"{v:.17g}" for v in row]))
    return "\n".join(lines) + "\n"
