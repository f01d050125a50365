"""Quadtree meshes over axis-aligned rectangles.

Cells are addressed by integer keys ``(level, ix, iy)``; node positions are
kept as integer lattice coordinates at the resolution of the finest leaf, so
node deduplication is exact and never needs a floating tolerance.
"""
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .errors import InvalidDomainError

# side -> (dx, dy) of the edge neighbour
_SIDES = {"bottom": (0, -1), "right": (1, 0), "top": (0, 1), "left": (-1, 0)}
_OPPOSITE = {"bottom": "top", "top": "bottom", "left": "right", "right": "left"}


@dataclass(frozen=True)
class Domain:
    origin: tuple = (0.0, 0.0)
    width: float = 1.0
    height: float = 1.0

    def __post_init__(self):
        if not (self.width > 0 and self.height > 0):
            raise InvalidDomainError(
                f"domain extent must be positive, got {self.width} x {self.height}")
        object.__setattr__(self, "origin", (float(self.origin[0]), float(self.origin[1])))

    @property
    def area(self):
        return self.width * self.height


class QuadtreeCell(NamedTuple):
    level: int
    ix: int
    iy: int
    bounds: tuple  # (x0, y0, x1, y1)

    @property
    def key(self):
        return (self.level, self.ix, self.iy)

    @property
    def center(self):
        x0, y0, x1, y1 = self.bounds
        return (0.5 * (x0 + x1), 0.5 * (y0 + y1))

    @property
    def size(self):
        x0, y0, x1, y1 = self.bounds
        return (x1 - x0, y1 - y0)


@dataclass(frozen=True, eq=False)
class PolygonElement:
    """Boundary cycle of one leaf cell, hanging nodes included.

    Vertices run counter-clockwise starting at the lower-left corner.
    """

    node_ids: tuple
    coords: np.ndarray
    cell: tuple
    hanging_mask: tuple
    bounds: tuple
    edge_counts: tuple = (0, 0, 0, 0)  # hanging nodes on bottom, right, top, left

    @property
    def n(self):
        return len(self.node_ids)

    @property
    def area(self):
        return polygon_area(self.coords)

    @property
    def diameter(self):
        x0, y0, x1, y1 = self.bounds
        return float(np.hypot(x1 - x0, y1 - y0))

    def normalized_key(self):
        """Geometry signature invariant under translation and uniform scaling.

        Two elements with equal keys have identical stiffness matrices (for
        any treatment) up to round-off, which the solver uses for caching.
        """
        x0, y0, x1, _ = self.bounds
        s = x1 - x0
        rel = (self.coords - (x0, y0)) / s
        return tuple(np.round(rel, 12).ravel().tolist())


def polygon_area(coords):
    x, y = np.asarray(coords, dtype=float).T
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def _make_cell(domain, key):
    l, i, j = key
    ox, oy = domain.origin
    hx = domain.width / 2**l
    hy = domain.height / 2**l
    return QuadtreeCell(l, i, j, (ox + i * hx, oy + j * hy,
                                  ox + (i + 1) * hx, oy + (j + 1) * hy))


def _children(key):
    l, i, j = key
    return [(l + 1, 2 * i + a, 2 * j + b) for b in (0, 1) for a in (0, 1)]


def _facing_children(key, side):
    """Children of ``key`` touching its ``side`` edge."""
    l, i, j = key
    if side == "bottom":
        return [(l + 1, 2 * i, 2 * j), (l + 1, 2 * i + 1, 2 * j)]
    if side == "top":
        return [(l + 1, 2 * i, 2 * j + 1), (l + 1, 2 * i + 1, 2 * j + 1)]
    if side == "left":
        return [(l + 1, 2 * i, 2 * j), (l + 1, 2 * i, 2 * j + 1)]
    return [(l + 1, 2 * i + 1, 2 * j), (l + 1, 2 * i + 1, 2 * j + 1)]


class QuadtreeMesh:
    """Leaf set of a quadtree plus derived node / polygon data.

    Instances are immutable after construction; use :func:`build_quadtree`,
    :func:`balance_two_to_one` or :meth:`from_leaves` to create them.
    """

    def __init__(self, domain, leaves, balanced=False):
        self.domain = domain
        self.balanced = bool(balanced)
        self.leaves = tuple(sorted(leaves, key=lambda k: (k[0], k[2], k[1])))
        self._leafset = frozenset(self.leaves)
        refined = set()
        for l, i, j in self.leaves:
            while l > 0:
                l, i, j = l - 1, i // 2, j // 2
                if (l, i, j) in refined:
                    break
                refined.add((l, i, j))
        self._refined = frozenset(refined)
        self.max_level = max(k[0] for k in self.leaves)
        self._build_nodes()
        self._build_polygons()

    @classmethod
    def from_leaves(cls, domain, leaves, balanced=False):
        leaves = [tuple(int(v) for v in k) for k in leaves]
        _check_leaf_cover(leaves)
        return cls(domain, leaves, balanced)

    # -- cell queries -------------------------------------------------------
    def cell(self, key):
        return _make_cell(self.domain, key)

    def leaf_cells(self):
        return [self.cell(k) for k in self.leaves]

    def is_leaf(self, key):
        return key in self._leafset

    def neighbor_leaves(self, key, side):
        """Leaves sharing a segment of positive length with ``side`` of ``key``."""
        l, i, j = key
        dx, dy = _SIDES[side]
        n = 2**l
        ni, nj = i + dx, j + dy
        if not (0 <= ni < n and 0 <= nj < n):
            return []
        nb = (l, ni, nj)
        if nb in self._leafset:
            return [nb]
        if nb in self._refined:
            out, stack = [], [nb]
            face = _OPPOSITE[side]
            while stack:
                c = stack.pop()
                for ch in _facing_children(c, face):
                    if ch in self._leafset:
                        out.append(ch)
                    else:
                        stack.append(ch)
            return out
        while nb[0] > 0:
            nb = (nb[0] - 1, nb[1] // 2, nb[2] // 2)
            if nb in self._leafset:
                return [nb]
        raise AssertionError(f"no leaf covers neighbour of {key}")

    # -- nodes ----------------------------------------------------------------
    def _lattice_corners(self, key):
        l, i, j = key
        s = 1 << (self.max_level - l)
        return ((i * s, j * s), ((i + 1) * s, j * s),
                ((i + 1) * s, (j + 1) * s), (i * s, (j + 1) * s))

    def _build_nodes(self):
        keys = set()
        for leaf in self.leaves:
            keys.update(self._lattice_corners(leaf))
        self.node_keys = sorted(keys, key=lambda p: (p[1], p[0]))
        self._node_index = {p: n for n, p in enumerate(self.node_keys)}
        R = 1 << self.max_level
        lat = np.array(self.node_keys, dtype=float).reshape(-1, 2)
        ox, oy = self.domain.origin
        self.nodes = np.column_stack([ox + lat[:, 0] / R * self.domain.width,
                                      oy + lat[:, 1] / R * self.domain.height])
        self.nodes.setflags(write=False)
        self.leaf_corners = np.array(
            [[self._node_index[p] for p in self._lattice_corners(k)] for k in self.leaves],
            dtype=np.int64).reshape(-1, 4)

    def _edge_interior(self, key, side):
        """Lattice points strictly inside leaf edge ``side``, in CCW order."""
        c = self._lattice_corners(key)
        lo, hi = {"bottom": (c[0], c[1]), "right": (c[1], c[2]),
                  "top": (c[2], c[3]), "left": (c[3], c[0])}[side]
        pts = set()
        for nb in self.neighbor_leaves(key, side):
            if nb[0] <= key[0]:
                continue
            for p in self._lattice_corners(nb):
                if side in ("bottom", "top"):
                    if p[1] == lo[1] and min(lo[0], hi[0]) < p[0] < max(lo[0], hi[0]):
                        pts.add(p)
                elif p[0] == lo[0] and min(lo[1], hi[1]) < p[1] < max(lo[1], hi[1]):
                    pts.add(p)
        axis = 0 if side in ("bottom", "top") else 1
        return sorted(pts, key=lambda p: p[axis], reverse=side in ("top", "left")), lo, hi

    def _build_polygons(self):
        self.hanging = {}
        polys = []
        for key in self.leaves:
            ids, mask, counts = [], [], []
            for side in ("bottom", "right", "top", "left"):
                interior, lo, hi = self._edge_interior(key, side)
                ids.append(self._node_index[lo])
                mask.append(False)
                a, b = self._node_index[lo], self._node_index[hi]
                for p in interior:
                    nid = self._node_index[p]
                    ids.append(nid)
                    mask.append(True)
                    self.hanging[nid] = (a, b)
                counts.append(len(interior))
            coords = self.nodes[ids].copy()
            coords.setflags(write=False)
            polys.append(PolygonElement(tuple(ids), coords, key, tuple(mask),
                                        self.cell(key).bounds, tuple(counts)))
        self.polygons = tuple(polys)

    # -- misc ---------------------------------------------------------------
    @property
    def n_nodes(self):
        return len(self.node_keys)

    @property
    def n_leaves(self):
        return len(self.leaves)

    def leaf_areas(self):
        w, h = self.domain.width, self.domain.height
        return np.array([w * h / 4**k[0] for k in self.leaves])

    def mesh_size(self):
        """Representative h = sqrt(domain area / leaf count)."""
        return float(np.sqrt(self.domain.area / self.n_leaves))

    def max_adjacent_level_difference(self):
        worst = 0
        for key in self.leaves:
            for side in _SIDES:
                for nb in self.neighbor_leaves(key, side):
                    worst = max(worst, abs(nb[0] - key[0]))
        return worst

    def __repr__(self):
        return (f"QuadtreeMesh(leaves={self.n_leaves}, nodes={self.n_nodes}, "
                f"hanging={len(self.hanging)}, balanced={self.balanced})")


def _check_leaf_cover(leaves):
    leafset = set(leaves)
    area = sum(4.0 ** -l for l, _, _ in leaves)
    if len(leafset) != len(leaves) or abs(area - 1.0) > 1e-12:
        raise ValueError("leaf keys do not tile the root cell")
    for l, i, j in leaves:
        while l > 0:
            l, i, j = l - 1, i // 2, j // 2
            if (l, i, j) in leafset:
                raise ValueError("leaf keys overlap")


def build_quadtree(domain: Domain, refine: Callable[[QuadtreeCell], bool],
                   max_level: int) -> QuadtreeMesh:
    """Recursively split cells for which ``refine(cell)`` holds.

    Cells at ``max_level`` are never split. The returned mesh is not
    2:1 balanced unless the predicate happens to produce one.
    """
    if max_level < 0:
        raise ValueError("max_level must be >= 0")
    leaves, stack = [], [(0, 0, 0)]
    while stack:
        key = stack.pop()
        if key[0] < max_level and refine(_make_cell(domain, key)):
            stack.extend(_children(key))
        else:
            leaves.append(key)
    return QuadtreeMesh(domain, leaves, balanced=False)


def balance_two_to_one(mesh: QuadtreeMesh) -> QuadtreeMesh:
    """Refine leaves until edge neighbours differ by at most one level."""
    leaves = set(mesh.leaves)
    current = mesh
    while True:
        split = [k for k in current.leaves
                 if any(nb[0] > k[0] + 1 for side in _SIDES
                        for nb in current.neighbor_leaves(k, side))]
        if not split:
            break
        for k in split:
            leaves.discard(k)
            leaves.update(_children(k))
        current = QuadtreeMesh(mesh.domain, leaves)
    return QuadtreeMesh(mesh.domain, current.leaves, balanced=True)


def extract_polygon_elements(mesh: QuadtreeMesh):
    """One CCW :class:`PolygonElement` per leaf, hanging nodes included."""
    return list(mesh.polygons)


def refine_uniformly(mesh: QuadtreeMesh, times: int = 1) -> QuadtreeMesh:
    """Split every leaf ``times`` times.

    Level differences between neighbours are preserved, so a balanced mesh
    stays balanced and the hanging-node pattern is repeated at finer scale.
    """
    if times < 0:
        raise ValueError("times must be >= 0")
    leaves = list(mesh.leaves)
    for _ in range(times):
        leaves = [c for k in leaves for c in _children(k)]
    return QuadtreeMesh(mesh.domain, leaves, mesh.balanced)


def boundary_nodes(mesh: QuadtreeMesh):
    R = 1 << mesh.max_level
    return {n for n, (i, j) in enumerate(mesh.node_keys)
            if i == 0 or j == 0 or i == R or j == R}


# -- generator family -------------------------------------------------------

GENERATORS = ("uniform", "corner", "diag", "grad")
DEFAULT_BASE = {"uniform": 0, "corner": 1, "diag": 0, "grad": 2}


def _corner_pred(domain, depth, base):
    # uniform base grid, then the lower-left quadrant refined `depth` more levels
    ox, oy = domain.origin
    xm, ym = ox + 0.5 * domain.width, oy + 0.5 * domain.height

    def pred(cell):
        if cell.level < base:
            return True
        x0, y0, x1, y1 = cell.bounds
        return x1 <= xm and y1 <= ym
    return pred, base + depth


def _diag_pred(domain, depth, base):
    ox, oy = domain.origin

    def pred(cell):
        if cell.level < base:
            return True
        # open cell crossed by the line y = x (in domain-relative units)
        x0, y0, x1, y1 = cell.bounds
        u0, u1 = (x0 - ox) / domain.width, (x1 - ox) / domain.width
        v0, v1 = (y0 - oy) / domain.height, (y1 - oy) / domain.height
        return max(u0, v0) < min(u1, v1)
    return pred, max(depth, base)


def _grad_pred(domain, depth, base):
    from .problems import poisson_exact_gradient

    ox, oy = domain.origin
    t = np.linspace(0.0, 1.0, 5)
    su, sv = np.meshgrid(t, t)
    g = np.linspace(0.0, 1.0, 201)
    gx, gy = np.meshgrid(g, g)
    gmax = np.max(np.hypot(*poisson_exact_gradient(
        ox + gx * domain.width, oy + gy * domain.height)))

    def pred(cell):
        if cell.level < base:
            return True
        x0, y0, x1, y1 = cell.bounds
        dx, dy = poisson_exact_gradient(x0 + su * (x1 - x0), y0 + sv * (y1 - y0))
        local = np.max(np.hypot(dx, dy))
        return local > gmax * 2.0 ** (cell.level - depth)
    return pred, max(depth, base)


def generate_mesh(gen, depth, balance=True, domain=None, base=None):
    """Named reproducible mesh families.

    Every generator first refines all cells uniformly to level ``base``
    (default in ``DEFAULT_BASE``), then:

    ``uniform(k)``
        full refinement to level ``k``.
    ``corner(k)``
        the lower-left quadrant is refined ``k`` further levels; with the
        default base of 1 this is unbalanced for ``k >= 2``.
    ``diag(k)``
        cells crossed by the diagonal y = x are refined to level ``k``;
        unbalanced for ``k >= 3`` on the default base.
    ``grad(k)``
        a cell at level ``l < k`` is split when the Poisson exact
        solution's gradient magnitude on it exceeds ``max|grad u| * 2**(l - k)``.
    """
    domain = domain or Domain()
    if depth < 0:
        raise ValueError("depth must be >= 0")
    if gen not in GENERATORS:
        raise ValueError(f"unknown generator {gen!r}; choose from {GENERATORS}")
    base = DEFAULT_BASE[gen] if base is None else int(base)
    if base < 0:
        raise ValueError("base level must be >= 0")
    if gen == "uniform":
        mesh = build_quadtree(domain, lambda cell: True, depth)
    elif gen == "corner":
        mesh = build_quadtree(domain, *_corner_pred(domain, depth, base))
    elif gen == "diag":
        mesh = build_quadtree(domain, *_diag_pred(domain, depth, base))
    else:
        mesh = build_quadtree(domain, *_grad_pred(domain, depth, base))
    if balance:
        mesh = balance_two_to_one(mesh)
    return mesh


def mesh_id(gen, depth, balanced, base=None):
    """Short label such as ``corner2u``; a non-default base adds ``-b<level>``."""
    label = f"{gen}{depth}{'b' if balanced else 'u'}"
    if base is not None and gen != "uniform" and base != DEFAULT_BASE[gen]:
        label += f"-b{base}"
    return label
