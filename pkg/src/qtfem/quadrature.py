"""Quadrature rules on the reference square and the reference triangle.

Triangle rules are the symmetric Dunavant rules of degree 1-6 on the unit
triangle with vertices (0, 0), (1, 0), (0, 1). The constants below were
re-solved from the moment equations in 40-digit arithmetic, so the rules
are exact to double precision for every monomial up to their degree.
"""
from dataclasses import dataclass
from functools import lru_cache
from itertools import permutations

import numpy as np

from .errors import UnsupportedRuleError


@dataclass(frozen=True)
class QuadratureRule:
    points: np.ndarray
    weights: np.ndarray

    def __len__(self):
        return len(self.weights)

    def integrate(self, f):
        """Apply the rule to a vectorised ``f(points) -> values``."""
        return np.dot(self.weights, f(self.points))


def _frozen(rule_points, rule_weights):
    p = np.ascontiguousarray(rule_points, dtype=float)
    w = np.ascontiguousarray(rule_weights, dtype=float)
    p.setflags(write=False)
    w.setflags(write=False)
    return QuadratureRule(p, w)


@lru_cache(maxsize=None)
def gauss_legendre(n):
    """n-point Gauss-Legendre rule on [-1, 1]."""
    if n < 1:
        raise UnsupportedRuleError(f"Gauss order must be >= 1, got {n}")
    x, w = np.polynomial.legendre.leggauss(n)
    return _frozen(x, w)


@lru_cache(maxsize=None)
def tensor_gauss_rule(order):
    """Plain order x order Gauss rule on [-1, 1]^2."""
    g = gauss_legendre(order)
    xi, eta = np.meshgrid(g.points, g.points, indexing="ij")
    w = np.outer(g.weights, g.weights)
    return _frozen(np.column_stack([xi.ravel(), eta.ravel()]), w.ravel())


@lru_cache(maxsize=None)
def modified_gauss_rule(order=2):
    """Quadrant-wise Gauss rule on [-1, 1]^2.

    An ``order x order`` Gauss rule is mapped onto each of the four
    quadrants separately, so no point lies on xi = 0 or eta = 0 where the
    transition shape functions have a kink. ``4 * order**2`` points,
    weights summing to 4.
    """
    if order < 1:
        raise UnsupportedRuleError(f"order must be >= 1, got {order}")
    base = tensor_gauss_rule(order)
    half = 0.5 * base.points
    pts, wts = [], []
    for sx in (-1.0, 1.0):
        for sy in (-1.0, 1.0):
            pts.append(np.column_stack([half[:, 0] + 0.5 * sx, half[:, 1] + 0.5 * sy]))
            wts.append(0.25 * base.weights)
    return _frozen(np.vstack(pts), np.concatenate(wts))


# (weight, orbit) with weights normalised to sum 1; orbits in barycentric form
_S3 = 1.0 / 3.0
_DUNAVANT = {
    1: [(1.0, (_S3, _S3, _S3))],
    2: [(1.0 / 3.0, (2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0))],
    3: [(-27.0 / 48.0, (_S3, _S3, _S3)),
        (25.0 / 48.0, (0.6, 0.2, 0.2))],
    4: [(0.22338158967801146570, (0.44594849091596488632, 0.44594849091596488632,
                                  0.10810301816807022736)),
        (0.10995174365532186764, (0.09157621350977074346, 0.09157621350977074346,
                                  0.81684757298045851308))],
    5: [(0.225, (_S3, _S3, _S3)),
        (0.13239415278850618074, (0.47014206410511508977, 0.47014206410511508977,
                                  0.05971587178976982046)),
        (0.12593918054482715260, (0.10128650732345633880, 0.10128650732345633880,
                                  0.79742698535308732240))],
    6: [(0.11678627572637936603, (0.24928674517091042129, 0.24928674517091042129,
                                  0.50142650965817915742)),
        (0.050844906370206816921, (0.06308901449150222834, 0.06308901449150222834,
                                   0.87382197101699554332)),
        (0.082851075618373575194, (0.053145049844816947353, 0.31035245103378440542,
                                   0.63650249912139864723))],
}

SUPPORTED_TRIANGLE_DEGREES = tuple(sorted(_DUNAVANT))


@lru_cache(maxsize=None)
def dunavant_rule(degree=6):
    """Symmetric Dunavant rule on the unit reference triangle.

    Points are returned in Cartesian coordinates of the triangle
    (0,0)-(1,0)-(0,1); weights sum to its area 1/2.
    """
    if degree not in _DUNAVANT:
        raise UnsupportedRuleError(
            f"no triangle rule of degree {degree}; supported: {SUPPORTED_TRIANGLE_DEGREES}")
    pts, wts = [], []
    for w, orbit in _DUNAVANT[degree]:
        for bary in sorted(set(permutations(orbit))):
            pts.append((bary[1], bary[2]))
            wts.append(0.5 * w)
    return _frozen(pts, wts)


def map_triangle_rule(rule, tri):
    """Map a reference-triangle rule onto triangle ``tri`` (3x2 array).

    Returns physical points (m, 2) and weights (m,) including the area
    scaling. ``tri`` may also be a stack (k, 3, 2); results are then
    (k, m, 2) and (k, m).
    """
    tri = np.asarray(tri, dtype=float)
    p = rule.points
    a, b, c = tri[..., 0, :], tri[..., 1, :], tri[..., 2, :]
    e1, e2 = b - a, c - a
    det = e1[..., 0] * e2[..., 1] - e1[..., 1] * e2[..., 0]
    x = (a[..., None, :] + p[:, 0, None] * e1[..., None, :]
         + p[:, 1, None] * e2[..., None, :])
    w = np.abs(det)[..., None] * rule.weights
    return x, w
