"""
Orthogonal polynomials on small point sets
==========================================

Two regular configurations: a 3x3 grid and six points on a circle.  On the
grid the cubes are dependent on lower terms; on the circle it is x2^2.
"""

import math

import numpy as np

from mlsorth.basis import select_basis
from mlsorth.mindex import format_monomial
from mlsorth.orthogonalize import build_orthonormal_basis
from mlsorth.pointset import make_pointset


def show(ob):
    for i, poly in enumerate(ob.expand()):
        terms = " ".join(f"{'-' if c < 0 else '+'} {abs(c):.6f} {format_monomial(a)}"
                         for a, c in poly.items() if abs(c) > 1e-12)
        terms = terms[2:] if terms.startswith("+ ") else "-" + terms[2:]
        print(f"  P{i} = {terms}")


g = [-1.0, 0.0, 1.0]
grid = make_pointset([(a, b) for b in g for a in g])
print(select_basis(grid).describe())
ob = build_orthonormal_basis(grid)
show(ob)

# the discrete Gram matrix of the result is the identity
print("max |G - I| on the grid:", np.max(np.abs(ob.gram() - np.eye(ob.n))))

circle = make_pointset([(math.cos(k * math.pi / 3), math.sin(k * math.pi / 3))
                        for k in range(6)])
print()
print(select_basis(circle).describe())
show(build_orthonormal_basis(circle))
