"""Quadrature that follows the gradient discontinuities of Laplace interpolants.

The natural neighbours of an interior point x change only when x crosses an
empty circumcircle of three polygon vertices. Across such an arc the
interpolant is continuous but its gradient jumps, so a plain triangle rule
converges only at first order in the sub-triangle size.

Each centroid-fan triangle (c, a, b) is parametrised by rays from c,
``x = c + rho * (a + t (b - a) - c)``. The t range is split wherever the
combinatorics of the ray/circle intersections change (tangent rays, circles
crossing the edge ab, circle-circle intersections inside the triangle), and
along each ray the rho range is split at the circle crossings. Every piece
is then smooth and is integrated with graded tensor Gauss points.
"""
import itertools

import numpy as np

from .element import fan_triangles
from .quadrature import gauss_legendre

_CUT = 1e-9


def empty_circumcircles(coords, rtol=1e-10):
    """Centres (k, 2) and radii (k,) of circles through 3 vertices with none inside."""
    P = np.asarray(coords, dtype=float)
    scale = float(np.ptp(P, axis=0).max())
    centres, radii = [], []
    for i, j, k in itertools.combinations(range(len(P)), 3):
        a, b, c = P[i], P[j], P[k]
        d = 2.0 * (a[0] * (b[1] - c[1]) + b[0] * (c[1] - a[1]) + c[0] * (a[1] - b[1]))
        if abs(d) <= 1e-12 * scale * scale:
            continue
        aa, bb, cc = a @ a, b @ b, c @ c
        o = np.array([aa * (b[1] - c[1]) + bb * (c[1] - a[1]) + cc * (a[1] - b[1]),
                      aa * (c[0] - b[0]) + bb * (a[0] - c[0]) + cc * (b[0] - a[0])]) / d
        r = float(np.hypot(*(a - o)))
        if np.any(np.hypot(*(P - o).T) < r * (1.0 - rtol)):
            continue
        if any(np.hypot(*(o - q)) <= rtol * scale and abs(r - s) <= rtol * scale
               for q, s in zip(centres, radii)):
            continue
        centres.append(o)
        radii.append(r)
    return np.array(centres).reshape(-1, 2), np.array(radii)


def _roots(A, B, C):
    if A == 0.0:
        return [] if B == 0.0 else [-C / B]
    disc = B * B - 4.0 * A * C
    if disc < 0.0:
        return []
    s = np.sqrt(disc)
    # numerically stable pair
    q = -0.5 * (B + np.copysign(s, B))
    out = [q / A]
    if q != 0.0:
        out.append(C / q)
    return out


def _ray_hit(c, d0, e, p):
    """(t, rho) with p = c + rho (d0 + t e), or None when the ray is parallel."""
    q = p - c
    den = q[0] * e[1] - q[1] * e[0]
    if den == 0.0:
        return None
    t = -(q[0] * d0[1] - q[1] * d0[0]) / den
    d = d0 + t * e
    return t, float(q @ d) / float(d @ d)


def _t_breaks(c, a, b, centres, radii):
    e = b - a
    d0 = a - c
    brk = {0.0, 1.0}
    for o, r in zip(centres, radii):
        f = a - o
        brk.update(_roots(e @ e, 2.0 * (e @ f), f @ f - r * r))
        # rays tangent to the circle, kept when the tangent point is inside
        g = c - o
        k = g @ g - r * r
        for t in _roots((e @ g) ** 2 - (e @ e) * k,
                        2.0 * (d0 @ g) * (e @ g) - 2.0 * (d0 @ e) * k,
                        (d0 @ g) ** 2 - (d0 @ d0) * k):
            d = d0 + t * e
            if 0.0 < -(d @ g) / (d @ d) < 1.0:
                brk.add(t)
    for (o1, r1), (o2, r2) in itertools.combinations(zip(centres, radii), 2):
        dist = float(np.hypot(*(o2 - o1)))
        if dist == 0.0 or dist > r1 + r2 or dist < abs(r1 - r2):
            continue
        along = (r1 * r1 - r2 * r2 + dist * dist) / (2.0 * dist)
        h = np.sqrt(max(r1 * r1 - along * along, 0.0))
        u = (o2 - o1) / dist
        m = o1 + along * u
        for p in (m + h * np.array([-u[1], u[0]]), m - h * np.array([-u[1], u[0]])):
            hit = _ray_hit(c, d0, e, p)
            if hit is not None and 0.0 < hit[1] < 1.0:
                brk.add(hit[0])
    ts = sorted(t for t in brk if 0.0 <= t <= 1.0)
    out = [ts[0]]
    for t in ts[1:]:
        if t - out[-1] > _CUT:
            out.append(t)
    out[-1] = 1.0
    return out


def _meets_triangle(o, r, tri):
    """True when the circle boundary passes through the closed triangle."""
    dist = np.hypot(*(tri - o).T)
    if dist.max() < r * (1 - 1e-12):
        return False
    # distance from the centre to the triangle
    inside = True
    best = np.inf
    for i in range(3):
        p, q = tri[i], tri[(i + 1) % 3]
        e = q - p
        cr = e[0] * (o[1] - p[1]) - e[1] * (o[0] - p[0])
        inside &= cr >= 0.0
        s = np.clip((o - p) @ e / (e @ e), 0.0, 1.0)
        best = min(best, float(np.hypot(*(p + s * e - o))))
    return inside or best <= r * (1 + 1e-12)


def _graded(n):
    """Gauss points mapped by the smoothstep 3s^2 - 2s^3 on [0, 1]."""
    rule = gauss_legendre(n)
    s = 0.5 * (rule.points + 1.0)
    return 3 * s * s - 2 * s ** 3, 0.5 * rule.weights * (6 * s - 6 * s * s)


def triangle_rule(c, a, b, centres, radii, order=12):
    """Points and weights on the triangle (c, a, b) split along the circles."""
    c, a, b = (np.asarray(v, dtype=float) for v in (c, a, b))
    e = b - a
    jac = abs((a - c)[0] * e[1] - (a - c)[1] * e[0])
    u, wu = _graded(order)
    tb = _t_breaks(c, a, b, centres, radii)
    pts, wts = [], []
    for t0, t1 in zip(tb[:-1], tb[1:]):
        for t, wt in zip(t0 + (t1 - t0) * u, (t1 - t0) * wu):
            d = a - c + t * e
            rb = [0.0, 1.0]
            for o, r in zip(centres, radii):
                g = c - o
                rb.extend(rho for rho in _roots(d @ d, 2.0 * (d @ g), g @ g - r * r)
                          if _CUT < rho < 1.0 - _CUT)
            rb.sort()
            for r0, r1 in zip(rb[:-1], rb[1:]):
                if r1 - r0 <= _CUT:
                    continue
                rho = r0 + (r1 - r0) * u
                pts.append(c + rho[:, None] * d)
                wts.append(wt * (r1 - r0) * wu * rho * jac)
    return np.vstack(pts), np.concatenate(wts)


def circle_aware_quadrature(coords, order=12, margin=1e-11):
    """Quadrature on a convex polygon resolving the natural-neighbour circles.

    Parameters
    ----------
    coords : (n, 2) array
        Counter-clockwise polygon vertices.
    order : int
        Gauss points per direction on each smooth piece.
    margin : float
        Points closer than ``margin * diameter`` to the boundary are dropped;
        their weights are negligible and the interpolant cannot be evaluated
        on the boundary.

    Returns
    -------
    points : (m, 2) array
    weights : (m,) array
    """
    coords = np.asarray(coords, dtype=float)
    centres, radii = empty_circumcircles(coords)
    # a circle through every vertex bounds the polygon and never enters it
    cut = [np.any(np.abs(np.hypot(*(coords - o).T) - r) > 1e-10 * r) for o, r in zip(centres, radii)]
    centres, radii = centres[cut], radii[cut]
    X, W = [], []
    for tri in fan_triangles(coords):
        hit = [_meets_triangle(o, r, tri) for o, r in zip(centres, radii)]
        x, w = triangle_rule(tri[0], tri[1], tri[2], centres[hit], radii[hit], order)
        X.append(x)
        W.append(w)
    x, w = np.vstack(X), np.concatenate(W)
    span = np.ptp(coords, axis=0)
    tol = margin * float(np.hypot(*span))
    keep = np.ones(len(x), dtype=bool)
    n = len(coords)
    for i in range(n):
        p, q = coords[i], coords[(i + 1) % n]
        edge = q - p
        cross = edge[0] * (x[:, 1] - p[1]) - edge[1] * (x[:, 0] - p[0])
        keep &= cross > tol * np.hypot(*edge)
    return x[keep], w[keep]
