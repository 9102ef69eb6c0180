"""Moving least squares interpolation and differentiation on scattered
points with discrete orthogonal polynomials."""

from .basis import MonomialBasis, SelectionConfig, basis_from_monomials, select_basis
from .fit import estimate_derivative, fit_coefficients, stencil
from .orthogonalize import OrthonormalBasis, build_orthonormal_basis
from .pointset import PointSet, make_pointset, read_points

__all__ = [
    "MonomialBasis",
    "OrthonormalBasis",
    "PointSet",
    "SelectionConfig",
    "basis_from_monomials",
    "build_orthonormal_basis",
    "estimate_derivative",
    "fit_coefficients",
    "make_pointset",
    "read_points",
    "select_basis",
    "stencil",
]
