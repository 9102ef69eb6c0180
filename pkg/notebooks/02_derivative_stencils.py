"""
Derivative stencils on scattered points
=======================================

A stencil is one weight per node.  Its dot product with sampled values gives
the fitted value or a derivative at the evaluation point.
"""

import warnings

import numpy as np

from mlsorth.basis import SelectionConfig
from mlsorth.fit import derivative_stencil, estimate_derivative, interpolation_weights
from mlsorth.orthogonalize import build_orthonormal_basis
from mlsorth.pointset import make_pointset

rng = np.random.default_rng(1)
pts = make_pointset(0.1 * rng.uniform(-1, 1, (30, 2)))
f = np.exp(pts.points[:, 0]) * np.cos(pts.points[:, 1])
x0 = np.zeros(2)

ob = build_orthonormal_basis(pts, SelectionConfig.order(3), center=x0)
interp = interpolation_weights(ob, x0)
dx = derivative_stencil(ob, x0, (1, 0))
dyy = derivative_stencil(ob, x0, (0, 2))

# interpolation weights sum to one, derivative weights to zero
print("sum of weights:", interp.node_weights.sum(), dx.node_weights.sum())

# exact values at the origin are 1, 1 and -1
print("f      ~", interp.apply(f))
print("df/dx  ~", dx.apply(f))
print("d2f/dy2 ~", dyy.apply(f))

# the one-call route picks neighbours, builds the frame and reports gaps
est = estimate_derivative(pts, f, x0, (1, 1), SelectionConfig.order(3), n_neighbors=12)
print("d2f/dxdy ~", est.value, "using", est.diagnostics.n_points, "points")

# two points cannot separate x2 from a constant: the estimate is flagged
two = make_pointset([[0.0, 0.0], [1.0, 0.0]])
with warnings.catch_warnings(record=True) as caught:
    warnings.simplefilter("always")
    estimate_derivative(two, [0.0, 1.0], x0, (1, 0))
print(caught[0].message)
