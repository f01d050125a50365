"""Cell-based strain smoothing on polygonal quadtree elements.

Every smoothing-cell vertex carries the element shape-function values at
that point (a row of weights over the element nodes). Along element edges
these are the linear edge traces; the fan centre carries 1/n per node and
interior segments blend linearly. The smoothed gradient of subcell C is

    g_I = (1/A_C) sum_segments N_I(midpoint) * n * length

with the outward normal n, i.e. one Gauss point per segment.
"""
from dataclasses import dataclass

import numpy as np

from .element import ElementStiffness
from .errors import DegenerateGeometryError, SchemeMismatchError
from .material import strain_matrix
from .mesh import polygon_area

SCHEMES = ("one", "n_triangles", "four_quads")


@dataclass(frozen=True)
class SmoothingCell:
    vertices: np.ndarray   # (k, 2), counter-clockwise
    weights: np.ndarray    # (k, n) element shape values at the vertices
    area: float


@dataclass(frozen=True)
class SmoothedBMatrix:
    matrix: np.ndarray     # (strain components, n * dofs_per_node)
    gradients: np.ndarray  # (n, 2) smoothed shape gradients
    node_ids: tuple


def _cell(vertices, weights):
    vertices = np.asarray(vertices, dtype=float)
    return SmoothingCell(vertices, np.asarray(weights, dtype=float), polygon_area(vertices))


def default_scheme(element):
    return "four_quads" if element.n == 4 else "n_triangles"


def decompose_subcells(element, scheme):
    coords = np.asarray(element.coords, dtype=float)
    n = len(coords)
    eye = np.eye(n)
    if scheme == "one":
        return [_cell(coords, eye)]
    if scheme == "n_triangles":
        cw = np.full(n, 1.0 / n)
        c = cw @ coords
        return [_cell([c, coords[k], coords[(k + 1) % n]],
                      [cw, eye[k], eye[(k + 1) % n]]) for k in range(n)]
    if scheme == "four_quads":
        if n != 4:
            raise SchemeMismatchError(
                f"four_quads needs a 4-node element, cell {element.cell} has {n} nodes")
        cw = np.full(4, 0.25)
        mid_w = [0.5 * (eye[k] + eye[(k + 1) % 4]) for k in range(4)]
        cells = []
        for k in range(4):
            w = [eye[k], mid_w[k], cw, mid_w[k - 1]]
            cells.append(_cell(np.array(w) @ coords, w))
        return cells
    raise SchemeMismatchError(f"unknown smoothing scheme {scheme!r}; choose from {SCHEMES}")


def smoothed_gradients(subcell):
    """(n, 2) boundary-integrated average of the shape gradients over the cell."""
    v, W = subcell.vertices, subcell.weights
    nxt = np.roll(v, -1, axis=0)
    edge = nxt - v
    length = np.hypot(edge[:, 0], edge[:, 1])
    if np.any(length <= 1e-14 * length.max()):
        raise DegenerateGeometryError("smoothing cell has a zero-length segment")
    normal_len = np.column_stack([edge[:, 1], -edge[:, 0]])
    mid = 0.5 * (W + np.roll(W, -1, axis=0))
    return mid.T @ normal_len / subcell.area


def smoothed_B(subcell, element, dofs_per_node=1):
    g = smoothed_gradients(subcell)
    return SmoothedBMatrix(strain_matrix(g, dofs_per_node), g, tuple(element.node_ids))


def csfem_element_stiffness(element, material, scheme=None):
    """Smoothed stiffness sum_C A_C B_C^T D B_C."""
    scheme = scheme or default_scheme(element)
    d = material.dofs_per_node
    size = element.n * d
    K = np.zeros((size, size))
    for cell in decompose_subcells(element, scheme):
        B = smoothed_B(cell, element, d).matrix
        K += cell.area * B.T @ material.D @ B
    K = 0.5 * (K + K.T)
    return ElementStiffness(K, element.node_ids, d, {"scheme": scheme})
