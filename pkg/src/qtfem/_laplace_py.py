"""Pure-Python Laplace (non-Sibsonian natural neighbour) shape functions.

Reference implementation of the kernel in ``_laplace_c.pyx``; both must
return identical results to round-off.

For a point x inside a convex polygon with vertices P_J, the Voronoi cell
of x in {x} U {P_J} is built by clipping a box with the bisector
half-planes. Each cell edge is tagged with the vertex whose bisector
produced it, giving the edge lengths s_J; the weights are
alpha_J = s_J / |x - P_J|.

Gradients are analytic. A cell vertex v on the bisectors of P_J and P_K
satisfies 2 v.(P - x) = |P|^2 - |x|^2 for both, so
dv/dx_a = c (v - x)_a with c = A^{-1} [1, 1], A = [P_J - x; P_K - x].
"""
import math

import numpy as np

from .errors import NearSingularEvaluationError

BOX = -1


def _clip(poly, labels, x, p, j):
    # keep y with (y - m).d <= 0, m = (x + p)/2, d = p - x
    dx, dy = p[0] - x[0], p[1] - x[1]
    mx, my = 0.5 * (x[0] + p[0]), 0.5 * (x[1] + p[1])
    out, out_lab = [], []
    k = len(poly)
    f = [(v[0] - mx) * dx + (v[1] - my) * dy for v in poly]
    for i in range(k):
        a, b = poly[i], poly[(i + 1) % k]
        fa, fb = f[i], f[(i + 1) % k]
        if fa <= 0.0:
            out.append(a)
            out_lab.append(labels[i])
            if fb > 0.0:
                t = fa / (fa - fb)
                out.append((a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])))
                out_lab.append(j)
        elif fb <= 0.0:
            t = fa / (fa - fb)
            out.append((a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])))
            out_lab.append(labels[i])
    return out, out_lab


def _voronoi_cell(verts, x, half):
    poly = [(x[0] - half, x[1] - half), (x[0] + half, x[1] - half),
            (x[0] + half, x[1] + half), (x[0] - half, x[1] + half)]
    labels = [BOX] * 4
    for j, p in enumerate(verts):
        poly, labels = _clip(poly, labels, x, p, j)
    return poly, labels


def _check_point(verts, x, diam):
    n = len(verts)
    for i in range(n):
        a, b = verts[i], verts[(i + 1) % n]
        ex, ey = b[0] - a[0], b[1] - a[1]
        cross = ex * (x[1] - a[1]) - ey * (x[0] - a[0])
        if cross <= 1e-13 * diam * math.hypot(ex, ey):
            raise NearSingularEvaluationError(
                f"point {tuple(x)} is not strictly inside the polygon")


def laplace_point(verts, x, want_grad=True):
    """Values (n,) and gradients (n, 2) at a single point."""
    n = len(verts)
    xs = [v[0] for v in verts]
    ys = [v[1] for v in verts]
    diam = math.hypot(max(xs) - min(xs), max(ys) - min(ys))
    _check_point(verts, x, diam)
    h = [math.hypot(x[0] - v[0], x[1] - v[1]) for v in verts]
    if min(h) <= 1e-12 * diam:
        raise NearSingularEvaluationError(f"point {tuple(x)} coincides with a vertex")

    half = 4.0 * diam
    for _ in range(64):
        poly, labels = _voronoi_cell(verts, x, half)
        k = len(poly)
        lengths = [math.hypot(poly[(i + 1) % k][0] - poly[i][0],
                              poly[(i + 1) % k][1] - poly[i][1]) for i in range(k)]
        if all(labels[i] != BOX or lengths[i] == 0.0 for i in range(k)):
            break
        half *= 4.0
    else:
        raise NearSingularEvaluationError("Voronoi cell of the point is unbounded")

    s = [0.0] * n
    for i in range(k):
        if labels[i] != BOX:
            s[labels[i]] += lengths[i]
    alpha = [s[j] / h[j] for j in range(n)]
    total = sum(alpha)
    phi = np.array(alpha) / total
    if not want_grad:
        return phi, None

    def vertex_rate(i, j, kk):
        # c such that dv/dx_a = c * (v - x)_a, v = poly[i] on bisectors j, kk
        a11, a12 = verts[j][0] - x[0], verts[j][1] - x[1]
        a21, a22 = verts[kk][0] - x[0], verts[kk][1] - x[1]
        det = a11 * a22 - a12 * a21
        return ((a22 - a12) / det, (a11 - a21) / det)

    ds = np.zeros((n, 2))
    for i in range(k):
        j = labels[i]
        if j == BOX or lengths[i] == 0.0:
            continue
        inx = (i + 1) % k
        ip = (i - 1) % k
        while labels[ip] == BOX:
            ip = (ip - 1) % k
        jn = inx
        while labels[jn] == BOX:
            jn = (jn + 1) % k
        vs, ve = poly[i], poly[inx]
        cs = vertex_rate(i, j, labels[ip])
        ce = vertex_rate(inx, j, labels[jn])
        tx, ty = (ve[0] - vs[0]) / lengths[i], (ve[1] - vs[1]) / lengths[i]
        for a in range(2):
            dve = (ce[0] * (ve[a] - x[a]), ce[1] * (ve[a] - x[a]))
            dvs = (cs[0] * (vs[a] - x[a]), cs[1] * (vs[a] - x[a]))
            ds[j, a] += tx * (dve[0] - dvs[0]) + ty * (dve[1] - dvs[1])

    dalpha = np.empty((n, 2))
    for j in range(n):
        for a in range(2):
            dh = (x[a] - verts[j][a]) / h[j]
            dalpha[j, a] = ds[j, a] / h[j] - s[j] * dh / h[j] ** 2
    grad = (dalpha - phi[:, None] * dalpha.sum(axis=0)) / total
    return phi, grad


def laplace_eval(verts, pts, want_grad=True):
    """Vectorised wrapper: values (m, n) and gradients (m, n, 2)."""
    verts = [tuple(map(float, v)) for v in np.asarray(verts, dtype=float)]
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    m, n = len(pts), len(verts)
    vals = np.empty((m, n))
    grads = np.empty((m, n, 2)) if want_grad else None
    for q in range(m):
        phi, g = laplace_point(verts, (float(pts[q, 0]), float(pts[q, 1])), want_grad)
        vals[q] = phi
        if want_grad:
            grads[q] = g
    return vals, grads
