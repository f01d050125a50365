"""Baseline hanging-node treatments: transition elements and Laplace polygons.

Transition (Gupta) elements live on the reference square [-1, 1]^2 with
corner nodes 1-4 at (-1,-1), (1,-1), (1,1), (-1,1) and optional mid-side
nodes 5 (bottom), 6 (right), 7 (top), 8 (left). The mid-side functions are

    N5 = (1 - |xi|)(1 - eta)/2     N6 = (1 + xi)(1 - |eta|)/2
    N7 = (1 - |xi|)(1 + eta)/2     N8 = (1 - xi)(1 - |eta|)/2

and each corner function is the bilinear one minus half of every active
mid-side function on its two edges.
"""
import logging
import warnings

import numpy as np

from .circle_quadrature import circle_aware_quadrature
from .element import ElementStiffness, fan_triangles, stiffness_from_gradients
from .errors import TreatmentNotApplicableError
from .kernels import laplace_eval
from .quadrature import dunavant_rule, map_triangle_rule, modified_gauss_rule

log = logging.getLogger(__name__)

_CORNERS = np.array([[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]])
# mid-side nodes adjacent to each corner (indices into the 4 mid-side slots)
_CORNER_MIDS = ((0, 3), (0, 1), (1, 2), (2, 3))


class GuptaLineWarning(UserWarning):
    """Gradient requested on a kink line without a side hint."""


def _sign(t, side):
    s = np.sign(t)
    if side is not None:
        s = np.where(t == 0.0, side, s)
    return s


def gupta_shape(xi, eta, mask=(False, False, False, False), side=None):
    """Transition-element shape functions at reference points.

    Parameters
    ----------
    xi, eta : float or array
        Reference coordinates in [-1, 1].
    mask : 4 bools
        Presence of mid-side nodes 5, 6, 7, 8.
    side : (sx, sy), optional
        Sign of the quadrant to take one-sided gradient limits from on the
        lines xi = 0 / eta = 0. Without it, evaluating a gradient exactly on
        an active kink line emits :class:`GuptaLineWarning` and the
        positive side is used.

    Returns
    -------
    values : (..., 8) array
    gradients : (..., 8, 2) array
        d/dxi and d/deta; inactive mid-side entries are zero.
    """
    xi = np.asarray(xi, dtype=float)
    eta = np.asarray(eta, dtype=float)
    mask = tuple(bool(m) for m in mask)
    if side is None:
        on_xi = (mask[0] or mask[2]) and np.any(xi == 0.0)
        on_eta = (mask[1] or mask[3]) and np.any(eta == 0.0)
        if on_xi or on_eta:
            warnings.warn("gradient evaluated on a transition-element kink line; "
                          "using the positive one-sided limit", GuptaLineWarning, stacklevel=2)
        sx = sy = 1.0
    else:
        sx, sy = side
    shape = np.broadcast(xi, eta).shape
    N = np.zeros(shape + (8,))
    dN = np.zeros(shape + (8, 2))
    for c, (a, b) in enumerate(_CORNERS):
        N[..., c] = 0.25 * (1 + a * xi) * (1 + b * eta)
        dN[..., c, 0] = 0.25 * a * (1 + b * eta)
        dN[..., c, 1] = 0.25 * b * (1 + a * xi)
    axi, aeta = np.abs(xi), np.abs(eta)
    sxi, seta = _sign(xi, sx), _sign(eta, sy)
    mids = [
        (0.5 * (1 - axi) * (1 - eta), -0.5 * sxi * (1 - eta), -0.5 * (1 - axi)),
        (0.5 * (1 + xi) * (1 - aeta), 0.5 * (1 - aeta), -0.5 * seta * (1 + xi)),
        (0.5 * (1 - axi) * (1 + eta), -0.5 * sxi * (1 + eta), 0.5 * (1 - axi)),
        (0.5 * (1 - xi) * (1 - aeta), -0.5 * (1 - aeta), -0.5 * seta * (1 - xi)),
    ]
    for m, (v, gx, gy) in enumerate(mids):
        if mask[m]:
            N[..., 4 + m] = v
            dN[..., 4 + m, 0] = gx
            dN[..., 4 + m, 1] = gy
    for c, pair in enumerate(_CORNER_MIDS):
        for m in pair:
            if mask[m]:
                N[..., c] -= 0.5 * N[..., 4 + m]
                dN[..., c, :] -= 0.5 * dN[..., 4 + m, :]
    return N, dN


def gupta_local_order(element):
    """Indices into the 8 Gupta slots, in the element's vertex order."""
    counts = element.edge_counts
    if any(c > 1 for c in counts):
        raise TreatmentNotApplicableError(
            f"cell {element.cell} has {max(counts)} hanging nodes on one edge; "
            "transition elements allow at most one", cell=element.cell)
    order = []
    for c in range(4):
        order.append(c)
        if counts[c]:
            order.append(4 + c)
    return order


def _gupta_mask(element):
    return tuple(c == 1 for c in element.edge_counts)


def to_reference(element, x):
    x0, y0, x1, y1 = element.bounds
    x = np.asarray(x, dtype=float)
    return (np.column_stack([(2 * x[..., 0] - x0 - x1) / (x1 - x0),
                             (2 * x[..., 1] - y0 - y1) / (y1 - y0)]))


def gupta_element_values(element, points):
    """Transition shape values (m, n) at physical points, vertex order."""
    order = gupta_local_order(element)
    ref = to_reference(element, points)
    N, _ = gupta_shape(ref[:, 0], ref[:, 1], _gupta_mask(element), side=(1.0, 1.0))
    return N[:, order]


def fem_element_stiffness(element, material, order=2):
    """Transition-element stiffness with the quadrant-wise Gauss rule."""
    local = gupta_local_order(element)
    mask = _gupta_mask(element)
    x0, y0, x1, y1 = element.bounds
    w, h = x1 - x0, y1 - y0
    rule = modified_gauss_rule(order)
    xi, eta = rule.points[:, 0], rule.points[:, 1]
    side = (np.sign(xi), np.sign(eta))
    N, dN = gupta_shape(xi, eta, mask, side=side)
    grads = dN[:, local, :] * np.array([2.0 / w, 2.0 / h])
    K = stiffness_from_gradients(grads, rule.weights * (w * h / 4.0), material)
    return ElementStiffness(K, element.node_ids, material.dofs_per_node)


def _vertices(polygon):
    return np.asarray(getattr(polygon, "coords", polygon), dtype=float)


def laplace_shape(polygon, x, finite_difference=False):
    """Laplace interpolant values and gradients at interior point(s) ``x``.

    Returns arrays of shape (n,) / (n, 2) for a single point and (m, n) /
    (m, n, 2) for a stack of points. ``finite_difference=True`` replaces
    the analytic gradient by central differences of half-width
    1e-6 * diameter.
    """
    verts = _vertices(polygon)
    pts = np.asarray(x, dtype=float)
    single = pts.ndim == 1
    pts = np.atleast_2d(pts)
    if finite_difference:
        vals, _ = laplace_eval(verts, pts, False)
        span = verts.max(axis=0) - verts.min(axis=0)
        hstep = 1e-6 * float(np.hypot(*span))
        grads = np.empty(vals.shape + (2,))
        for a in range(2):
            e = np.zeros(2)
            e[a] = hstep
            vp, _ = laplace_eval(verts, pts + e, False)
            vm, _ = laplace_eval(verts, pts - e, False)
            grads[..., a] = (vp - vm) / (2 * hstep)
    else:
        vals, grads = laplace_eval(verts, pts, True)
    if single:
        return vals[0], grads[0]
    return vals, grads


def fan_quadrature(coords, degree=6):
    """Points (m, 2) and weights (m,) of the degree-``degree`` rule on a centroid fan."""
    tris = fan_triangles(coords)
    x, w = map_triangle_rule(dunavant_rule(degree), tris)
    return x.reshape(-1, 2), w.ravel()


def _keep_off_vertices(points, coords, diam):
    d = np.linalg.norm(points[:, None, :] - coords[None, :, :], axis=2)
    hit = d.min(axis=1) <= 1e-12 * diam
    if np.any(hit):
        c = coords.mean(axis=0)
        toward = c - points[hit]
        toward /= np.linalg.norm(toward, axis=1)[:, None]
        points = points.copy()
        points[hit] += 1e-10 * diam * toward
        log.debug("moved %d quadrature points off polygon vertices", int(hit.sum()))
    return points, int(hit.sum())


def pfem_element_stiffness(element, material, degree=6, quadrature="circles", order=None):
    """Laplace-interpolant polygon stiffness.

    Parameters
    ----------
    element : PolygonElement
    material : Material
    degree : int
        Triangle rule degree for ``quadrature="fan"``.
    quadrature : {"circles", "fan"}
        ``"fan"`` applies the triangle rule on each centroid-fan triangle.
        ``"circles"`` further splits the fan triangles along the empty
        circumcircles of the vertices, where the Laplace gradients jump;
        see :mod:`qtfem.circle_quadrature`. On rectangles both agree.
    order : int, optional
        Gauss order per direction for ``quadrature="circles"``. Defaults to
        12 for cells with at most 8 nodes (every cell of a 2:1 balanced
        mesh) and 6 for larger cells, whose many circles already cut the
        cell into small smooth pieces.
    """
    coords = _vertices(element)
    span = coords.max(axis=0) - coords.min(axis=0)
    if quadrature == "circles":
        if order is None:
            order = 12 if len(coords) <= 8 else 6
        pts, wts = circle_aware_quadrature(coords, order)
        moved = 0
    elif quadrature == "fan":
        pts, wts = fan_quadrature(coords, degree)
        pts, moved = _keep_off_vertices(pts, coords, float(np.hypot(*span)))
    else:
        raise ValueError(f"unknown PFEM quadrature {quadrature!r}")
    _, grads = laplace_eval(coords, pts, True)
    K = stiffness_from_gradients(grads, wts, material)
    info = {"quadrature_points": len(wts)}
    if moved:
        info["perturbed_points"] = moved
    return ElementStiffness(K, element.node_ids, material.dofs_per_node, info)
