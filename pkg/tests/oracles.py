"""Independent reference computations used by several test modules."""
import numpy as np
import scipy.sparse as sp

from conftest import UNIT_SQUARE, make_element
from qtfem.interp import fem_element_stiffness
from qtfem.material import Material


def fan_gradient_integral(P):
    """Area integral of the gradient of the piecewise-linear fan interpolant.

    Each node's shape function is linear on every fan triangle, with value
    1/n at the vertex mean. Returns (n, 2).
    """
    n = len(P)
    c = P.mean(axis=0)
    out = np.zeros((n, 2))
    for k in range(n):
        tri = np.array([c, P[k], P[(k + 1) % n]])
        T = np.column_stack([tri[1] - tri[0], tri[2] - tri[0]])
        area = 0.5 * abs(np.linalg.det(T))
        for i in range(n):
            vals = np.array([1.0 / n, float(i == k), float(i == (k + 1) % n)])
            grad = np.linalg.solve(T.T, vals[1:] - vals[0])
            out[i] += area * grad
    return out


def condensed_fine_stiffness(m):
    """Unit-square stiffness from an m x m bilinear grid.

    Interior dofs are condensed out and the boundary dofs are tied to the
    four corners by linear interpolation along each edge.
    """
    n = m + 1
    ke = fem_element_stiffness(make_element(UNIT_SQUARE / m), Material.scalar()).matrix
    rows, cols, vals = [], [], []
    for i in range(m):
        for j in range(m):
            ids = [j * n + i, j * n + i + 1, (j + 1) * n + i + 1, (j + 1) * n + i]
            rows += [a for a in ids for _ in ids]
            cols += ids * 4
            vals += list(ke.ravel())
    K = sp.coo_matrix((vals, (rows, cols)), shape=(n * n, n * n)).toarray()
    ij = np.array([(i, j) for j in range(n) for i in range(n)]) / m
    boundary = np.flatnonzero((ij == 0).any(axis=1) | (ij == 1).any(axis=1))
    interior = np.setdiff1d(np.arange(n * n), boundary)
    S = (K[np.ix_(boundary, boundary)]
         - K[np.ix_(boundary, interior)] @ np.linalg.solve(K[np.ix_(interior, interior)],
                                                          K[np.ix_(interior, boundary)]))
    x, y = ij[boundary].T
    # boundary values are the bilinear (hence edge-wise linear) blend of the corners
    T = np.column_stack([(1 - x) * (1 - y), x * (1 - y), x * y, (1 - x) * y])
    return T.T @ S @ T
