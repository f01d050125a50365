"""Shared element-level data types and integration helpers."""
from dataclasses import dataclass, field

import numpy as np

from .material import strain_matrix


@dataclass
class ElementStiffness:
    """Dense element matrix with its node map.

    Row/column ``a * d + c`` couples component ``c`` of local node ``a``,
    where ``d`` is the number of dofs per node.
    """

    matrix: np.ndarray
    node_ids: tuple
    dofs_per_node: int = 1
    info: dict = field(default_factory=dict)

    @property
    def dofs(self):
        d = self.dofs_per_node
        return np.array([n * d + c for n in self.node_ids for c in range(d)], dtype=np.int64)


def vertex_centroid(coords):
    return np.asarray(coords, dtype=float).mean(axis=0)


def fan_triangles(coords, center=None):
    """Triangles (n, 3, 2) joining ``center`` to each boundary segment."""
    coords = np.asarray(coords, dtype=float)
    c = vertex_centroid(coords) if center is None else np.asarray(center, dtype=float)
    nxt = np.roll(coords, -1, axis=0)
    return np.stack([np.broadcast_to(c, coords.shape), coords, nxt], axis=1)


def stiffness_from_gradients(grads, weights, material):
    """sum_q w_q B_q^T D B_q for shape gradients ``grads`` of shape (m, n, 2)."""
    grads = np.asarray(grads, dtype=float)
    D = material.D
    if material.dofs_per_node == 1:
        K = np.einsum("q,qia,ab,qjb->ij", weights, grads, D, grads)
    else:
        B = np.stack([strain_matrix(g, 2) for g in grads])
        K = np.einsum("q,qai,ab,qbj->ij", weights, B, D, B)
    return 0.5 * (K + K.T)
