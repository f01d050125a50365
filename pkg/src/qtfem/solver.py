"""Global assembly, boundary conditions, solution and error norms.

All quadtree leaves are translated and scaled copies of a small number of
reference polygons, and every per-element quantity used here (stiffness,
reference quadrature data, shape values, scaled boundary modes) is
invariant under translation and uniform scaling. Treatments therefore
cache them under :meth:`PolygonElement.normalized_key`.
"""
import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import interp, sbfem, smoothing
from .errors import IncompleteBoundaryConditionError, SingularSystemError
from .kernels import laplace_eval
from .material import Material
from .mesh import boundary_nodes
from .problems import PATCH_CASES, poisson_exact, poisson_source
from .quadrature import modified_gauss_rule

log = logging.getLogger(__name__)

TREATMENT_NAMES = ("fem", "pfem", "nsfem1", "nsfemn", "sbfem")


# -- treatments ---------------------------------------------------------------

class Treatment:
    """Element-level operations of one hanging-node treatment."""

    name = "base"
    error_degree = 6

    def __init__(self):
        self._stiff = {}
        self._load = {}
        self._interp = {}

    def __repr__(self):
        return f"{type(self).__name__}()"

    @staticmethod
    def _frame(element):
        x0, y0, x1, _ = element.bounds
        return np.array([x0, y0]), x1 - x0

    def _reference(self, element):
        o, s = self._frame(element)
        return (element.coords - o) / s

    def element_stiffness(self, element, material):
        key = (element.normalized_key(), material.key)
        K = self._stiff.get(key)
        if K is None:
            K = self.compute_stiffness(element, material).matrix
            self._stiff[key] = K
        return K

    def compute_stiffness(self, element, material):
        raise NotImplementedError

    # quadrature points (reference frame) and shape values for loads
    def load_data(self, element):
        raise NotImplementedError

    def element_load(self, element, material, source):
        key = element.normalized_key()
        data = self._load.get(key)
        if data is None:
            data = self.load_data(element)
            self._load[key] = data
        ref_pts, ref_w, N = data
        o, s = self._frame(element)
        pts = o + s * ref_pts
        b = np.asarray(source(pts[:, 0], pts[:, 1]), dtype=float)
        d = material.dofs_per_node
        b = b.reshape(len(ref_w), d)
        return ((s * s * ref_w)[:, None, None] * N[:, :, None] * b[:, None, :]).sum(axis=0).ravel()

    # values of the in-cell reconstruction at the error quadrature points
    def interpolation_values(self, reference_coords, reference_element, points):
        return laplace_eval(reference_coords, points, False)[0]

    def error_data(self, element):
        key = element.normalized_key()
        data = self._interp.get(key)
        if data is None:
            ref = self._reference(element)
            pts, w = interp.fan_quadrature(ref, self.error_degree)
            N = self.interpolation_values(ref, element, pts)
            data = (pts, w, N)
            self._interp[key] = data
        return data


class FEMTreatment(Treatment):
    """Conforming transition elements with the quadrant-wise Gauss rule."""

    name = "fem"
    load_order = 3

    def compute_stiffness(self, element, material):
        return interp.fem_element_stiffness(element, material)

    def load_data(self, element):
        rule = modified_gauss_rule(self.load_order)
        x0, y0, x1, y1 = element.bounds
        s = x1 - x0
        ratio = (y1 - y0) / s
        ref_pts = np.column_stack([(rule.points[:, 0] + 1) / 2, ratio * (rule.points[:, 1] + 1) / 2])
        order = interp.gupta_local_order(element)
        N, _ = interp.gupta_shape(rule.points[:, 0], rule.points[:, 1],
                                  interp._gupta_mask(element),
                                  side=(np.sign(rule.points[:, 0]), np.sign(rule.points[:, 1])))
        return ref_pts, rule.weights * ratio / 4.0, N[:, order]

    def interpolation_values(self, reference_coords, element, points):
        x0, y0, x1, y1 = element.bounds
        s = x1 - x0
        ref_bounds = (0.0, 0.0, 1.0, (y1 - y0) / s)
        xi = np.column_stack([2 * points[:, 0] / ref_bounds[2] - 1,
                              2 * points[:, 1] / ref_bounds[3] - 1])
        N, _ = interp.gupta_shape(xi[:, 0], xi[:, 1], interp._gupta_mask(element), side=(1.0, 1.0))
        return N[:, interp.gupta_local_order(element)]


class PFEMTreatment(Treatment):
    """Laplace interpolants, fan sub-triangulation, degree-6 triangle rule."""

    name = "pfem"

    def __init__(self, quadrature="circles", degree=6, order=None):
        super().__init__()
        self.quadrature = quadrature
        self.degree = degree
        self.order = order

    def compute_stiffness(self, element, material):
        return interp.pfem_element_stiffness(element, material, self.degree,
                                             self.quadrature, self.order)

    def load_data(self, element):
        ref = self._reference(element)
        pts, w = interp.fan_quadrature(ref, 6)
        return pts, w, laplace_eval(ref, pts, False)[0]


class NSFEMTreatment(PFEMTreatment):
    """Cell-based smoothing; ``hanging_scheme`` applies to cells with hanging nodes."""

    def __init__(self, hanging_scheme="n_triangles", standard_scheme="four_quads"):
        super().__init__()
        self.hanging_scheme = hanging_scheme
        self.standard_scheme = standard_scheme
        self.name = "nsfem1" if hanging_scheme == "one" else "nsfemn"

    def scheme_for(self, element):
        return self.standard_scheme if element.n == 4 else self.hanging_scheme

    def compute_stiffness(self, element, material):
        return smoothing.csfem_element_stiffness(element, material, self.scheme_for(element))


class SBFEMTreatment(Treatment):
    """Scaled boundary polygons.

    Parameters
    ----------
    load : {"linear", "boundary"}
        ``"linear"`` splits the source along each radial line into its
        value at the scaling centre plus a part growing linearly with xi,
        exact for linear sources. ``"boundary"`` uses the single
        ``xi**exponent`` term with the source sampled on the boundary.
    exponent : int
        Radial power for ``load="boundary"``.
    """

    name = "sbfem"

    def __init__(self, load="linear", exponent=0):
        super().__init__()
        if load not in ("linear", "boundary"):
            raise ValueError(f"unknown scaled boundary load model {load!r}")
        self.load = load
        self.exponent = exponent
        self._ops = {}

    def compute_stiffness(self, element, material):
        return sbfem.sbfem_element_stiffness(element, material)

    def _operators(self, element, material):
        key = (element.normalized_key(), material.key)
        ops = self._ops.get(key)
        if ops is None:
            geom = sbfem.scaled_boundary_geometry(element)
            E = sbfem.coefficient_matrices(geom, material)
            modal = sbfem.modal_solution(sbfem.hamiltonian(E).Z, material.dofs_per_node)
            ops = (sbfem.load_operator(modal, self.exponent), sbfem.load_operator(modal, 1))
            if self.load == "linear":
                ops = (sbfem.load_operator(modal, 0), ops[1])
            self._ops[key] = ops
        return ops

    def element_load(self, element, material, source):
        ops = self._operators(element, material)
        if self.load == "linear":
            return sbfem.centre_plus_linear_load(element, material, source, operators=ops)
        geom = sbfem.scaled_boundary_geometry(element)
        return ops[0] @ sbfem.boundary_load(geom, material, source)


_FACTORIES = {
    "fem": FEMTreatment,
    "pfem": PFEMTreatment,
    "nsfem1": lambda: NSFEMTreatment("one"),
    "nsfemn": lambda: NSFEMTreatment("n_triangles"),
    "sbfem": SBFEMTreatment,
}
_SHARED = {}


def make_treatment(name, shared=True):
    """Treatment instance from its CLI name.

    With ``shared=True`` one instance per name is reused for the whole
    process, so element matrices computed for one mesh are reused on the
    next.
    """
    if isinstance(name, Treatment):
        return name
    if name not in _FACTORIES:
        raise ValueError(f"unknown treatment {name!r}; choose from {TREATMENT_NAMES}")
    if not shared:
        return _FACTORIES[name]()
    if name not in _SHARED:
        _SHARED[name] = _FACTORIES[name]()
    return _SHARED[name]


# -- global system -----------------------------------------------------------

@dataclass
class GlobalSystem:
    K: sp.csr_matrix
    f: np.ndarray
    dofs_per_node: int
    mesh: object = None
    treatment: object = None

    @property
    def n_dof(self):
        return self.K.shape[0]


@dataclass
class ReducedSystem:
    K: sp.csr_matrix
    f: np.ndarray
    free: np.ndarray
    fixed: np.ndarray
    fixed_values: np.ndarray
    n_total: int
    info: dict = field(default_factory=dict)

    def recover(self, u_free):
        u = np.empty(self.n_total)
        u[self.free] = u_free
        u[self.fixed] = self.fixed_values
        return u


@dataclass
class ErrorReport:
    rel_l2_error: float
    abs_l2_error: float
    exact_norm: float
    n_dof: int
    treatment: str
    mesh_id: str = ""
    absolute: bool = False  # True when the exact norm vanished


def assemble(mesh, treatment, material=None, source=None):
    """Scatter element stiffness (and loads) into a sparse global system.

    ``source(x, y)`` is the right-hand side b of ``-div(D grad u) = b``;
    for plane strain it returns an (m, 2) array.
    """
    material = material or Material.scalar()
    treatment = make_treatment(treatment)
    d = material.dofs_per_node
    n_dof = mesh.n_nodes * d
    rows, cols, vals = [], [], []
    f = np.zeros(n_dof)
    for element in mesh.polygons:
        Ke = treatment.element_stiffness(element, material)
        dofs = np.array([n * d + c for n in element.node_ids for c in range(d)])
        rows.append(np.repeat(dofs, len(dofs)))
        cols.append(np.tile(dofs, len(dofs)))
        vals.append(Ke.ravel())
        if source is not None:
            np.add.at(f, dofs, treatment.element_load(element, material, source))
    K = sp.coo_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                      shape=(n_dof, n_dof)).tocsr()
    K = 0.5 * (K + K.T)
    return GlobalSystem(K.tocsr(), f, d, mesh, treatment)


def apply_dirichlet(system, values):
    """Eliminate prescribed dofs.

    ``values`` maps node id -> prescribed value (a scalar, or a length-d
    sequence for vector problems). Every domain-boundary node must be
    present when the system carries its mesh.
    """
    d = system.dofs_per_node
    if system.mesh is not None:
        for node in sorted(boundary_nodes(system.mesh)):
            if node not in values:
                raise IncompleteBoundaryConditionError(node)
    fixed, fixed_vals = [], []
    for node in sorted(values):
        v = np.atleast_1d(np.asarray(values[node], dtype=float))
        for c in range(d):
            fixed.append(node * d + c)
            fixed_vals.append(v[c] if v.size > 1 else v[0])
    fixed = np.array(fixed, dtype=np.int64)
    fixed_vals = np.array(fixed_vals, dtype=float)
    mask = np.ones(system.n_dof, dtype=bool)
    mask[fixed] = False
    free = np.flatnonzero(mask)
    K = system.K
    Kff = K[free][:, free].tocsr()
    rhs = system.f[free] - K[free][:, fixed] @ fixed_vals
    return ReducedSystem(Kff, rhs, free, fixed, fixed_vals, system.n_dof)


def solve(system):
    """Direct sparse solve; returns the full nodal solution vector.

    The factorisation uses symmetric mode without pivoting, so a
    non-positive pivot identifies a matrix that is not SPD. The residual
    ``|K u - f| / |f|`` is stored in ``system.info`` when available.
    """
    K = sp.csc_matrix(system.K)
    f = np.asarray(system.f, dtype=float)
    n = K.shape[0]
    info = getattr(system, "info", None)
    if n == 0:
        u = np.zeros(0)
        res = 0.0
    else:
        try:
            lu = spla.splu(K, permc_spec="MMD_AT_PLUS_A", diag_pivot_thresh=0.0,
                           options={"SymmetricMode": True})
        except RuntimeError as exc:
            raise SingularSystemError(f"factorisation failed: {exc}") from exc
        piv = lu.U.diagonal()
        scale = np.abs(piv).max()
        bad = np.flatnonzero(piv <= 1e-12 * scale)
        if bad.size:
            e = np.zeros(n)
            e[lu.perm_c[bad[0]]] = 1.0
            raise SingularSystemError(
                f"matrix is not positive definite: {bad.size} non-positive pivots",
                null_vector=e)
        u = lu.solve(f)
        fn = np.linalg.norm(f)
        r = np.linalg.norm(K @ u - f)
        res = r / fn if fn > 0 else r
        if res > 1e-10:
            log.warning("solve residual %.3e exceeds 1e-10", res)
    if info is not None:
        info["residual"] = float(res)
    log.debug("solved %d dofs, residual %.3e", n, res)
    if isinstance(system, ReducedSystem):
        return system.recover(u)
    return u


def l2_error(mesh, treatment, u_h, exact, mesh_id=""):
    """Relative L2 error using the treatment's in-cell reconstruction.

    Integration is the degree-6 rule on the centroid fan of each cell.
    ``exact(x, y)`` returns (m,) for scalar solutions.
    """
    treatment = make_treatment(treatment)
    u_h = np.asarray(u_h, dtype=float)
    err2 = ref2 = 0.0
    for element in mesh.polygons:
        pts, w, N = treatment.error_data(element)
        o, s = Treatment._frame(element)
        x = o + s * pts
        ue = np.asarray(exact(x[:, 0], x[:, 1]), dtype=float)
        uh = N @ u_h[list(element.node_ids)]
        ww = s * s * w
        err2 += float(np.dot(ww, (ue - uh) ** 2))
        ref2 += float(np.dot(ww, ue ** 2))
    abs_err = float(np.sqrt(err2))
    norm = float(np.sqrt(ref2))
    if norm == 0.0:
        return ErrorReport(abs_err, abs_err, 0.0, len(u_h), treatment.name, mesh_id, True)
    return ErrorReport(abs_err / norm, abs_err, norm, len(u_h), treatment.name, mesh_id)


def nodal_interpolant(mesh, func):
    return np.array(func(mesh.nodes[:, 0], mesh.nodes[:, 1]), dtype=float)


def solve_dirichlet_problem(mesh, treatment, g, source=None, material=None):
    """Assemble, impose u = g on the boundary, solve; returns (u, residual)."""
    treatment = make_treatment(treatment)
    system = assemble(mesh, treatment, material, source)
    bnodes = sorted(boundary_nodes(mesh))
    gv = nodal_interpolant(mesh, g)
    reduced = apply_dirichlet(system, {n: gv[n] for n in bnodes})
    u = solve(reduced)
    return u, reduced.info.get("residual", 0.0)


def run_patch_test(case, mesh, treatment, mesh_id=""):
    """Laplace problem with u = g on the boundary; g from case "A" or "B"."""
    g = PATCH_CASES[case]
    treatment = make_treatment(treatment)
    u, _ = solve_dirichlet_problem(mesh, treatment, g)
    return l2_error(mesh, treatment, u, g, mesh_id)


def poisson_rhs(x, y):
    # -lap(u) = -f
    return -poisson_source(x, y)


def convergence_slope(reports, meshes, last=3):
    """Least-squares slope of log(error) against log(h) over the last levels."""
    h = np.array([m.mesh_size() for m in meshes])[-last:]
    e = np.array([r.rel_l2_error for r in reports])[-last:]
    if len(h) < 2:
        return float("nan")
    return float(np.polyfit(np.log(h), np.log(e), 1)[0])


def run_poisson_convergence(meshes, treatment, mesh_ids=None):
    """Solve the manufactured Poisson problem on each mesh.

    Returns the list of :class:`ErrorReport` and the fitted slope.
    """
    treatment = make_treatment(treatment)
    reports = []
    for i, mesh in enumerate(meshes):
        u, _ = solve_dirichlet_problem(mesh, treatment, poisson_exact, poisson_rhs)
        mid = mesh_ids[i] if mesh_ids else ""
        reports.append(l2_error(mesh, treatment, u, poisson_exact, mid))
    return reports, convergence_slope(reports, meshes)
