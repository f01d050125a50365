"""Scaled boundary polygon elements.

Each polygon segment is a 2-node line element; a sector point is
``x = O + xi * x_b(eta)`` with the scaling centre O at the area centroid.
For a straight segment with end points a, b (relative to O) the boundary
Jacobian ``J = x_b y_b,eta - y_b x_b,eta = (a x b) / 2`` is constant, and

    grad = b1 d/dxi + xi^-1 b2 d/deta,
    b1 = [y_b,eta, -x_b,eta] / J,   b2 = [-y_b, x_b] / J.

With B1 = L(b1) N(eta) and B2 = L(b2) N,eta(eta) the coefficient matrices
are E0 = int B1' D B1 J, E1 = int B2' D B1 J, E2 = int B2' D B2 J.

The radial solution is u(xi) = Phi_u xi^(-Lambda) c with Re(lambda) < 0
taken from the Hamiltonian eigenproblem, and the boundary forces
q = E0 u,xi + E1' u at xi = 1 give

    K = E1' - E0 Phi_u Lambda Phi_u^-1.
"""
import csv
import logging
import os
import tempfile
from dataclasses import dataclass, field

import numpy as np

from .element import ElementStiffness
from .errors import DegenerateGeometryError, ModeSelectionError, NumericalFailureError
from .mesh import polygon_area
from .quadrature import gauss_legendre

log = logging.getLogger(__name__)

TOL_ZERO = 1e-6
ASYMMETRY_LIMIT = 1e-6
CONDITION_WARN = 1e12


@dataclass(frozen=True)
class ScaledBoundaryGeometry:
    centre: np.ndarray      # scaling centre O
    segments: np.ndarray    # (n, 2, 2) end points relative to O
    node_ids: tuple
    jacobian: np.ndarray    # (n,) constant |J| per segment

    @property
    def n_nodes(self):
        return len(self.node_ids)

    def signed_area(self):
        return float(self.jacobian.sum())


@dataclass
class CoefficientMatrices:
    E0: np.ndarray
    E1: np.ndarray
    E2: np.ndarray
    dofs_per_node: int


@dataclass
class HamiltonianMatrix:
    Z: np.ndarray
    condition_E0: float
    warnings: list = field(default_factory=list)


@dataclass
class ModalSolution:
    eigenvalues: np.ndarray  # (n*d,) with the constant modes (lambda = 0) last
    phi_u: np.ndarray        # (n*d, n*d) modal displacements
    n_genuine: int
    condition: float
    spectrum: np.ndarray     # full eigenvalue list of Z, for diagnostics

    @property
    def n_modes(self):
        return len(self.eigenvalues)

    def integration_constants(self, u_b):
        return np.linalg.solve(self.phi_u, u_b)


@dataclass
class BodyLoadSpec:
    """b(xi, eta) = xi**k * b(eta); ``intensity(x, y)`` is sampled on the boundary."""

    intensity: object
    exponent: int = 0


def scaled_boundary_geometry(element):
    coords = np.asarray(getattr(element, "coords", element), dtype=float)
    area = polygon_area(coords)
    if not area > 0:
        raise DegenerateGeometryError("polygon has non-positive area")
    x, y = coords.T
    xn, yn = np.roll(x, -1), np.roll(y, -1)
    cross = x * yn - xn * y
    centre = np.array([np.sum((x + xn) * cross), np.sum((y + yn) * cross)]) / (6.0 * area)
    rel = coords - centre
    seg = np.stack([rel, np.roll(rel, -1, axis=0)], axis=1)
    jac = 0.5 * (seg[:, 0, 0] * seg[:, 1, 1] - seg[:, 0, 1] * seg[:, 1, 0])
    if np.any(jac <= 1e-14 * area):
        raise DegenerateGeometryError("boundary is not strictly visible from the scaling centre")
    node_ids = tuple(getattr(element, "node_ids", range(len(coords))))
    return ScaledBoundaryGeometry(centre, seg, node_ids, jac)


def _operator(g, d):
    """Strain operator rows for a direction vector g = (gx, gy)."""
    if d == 1:
        return np.array([[g[0]], [g[1]]])
    return np.array([[g[0], 0.0], [0.0, g[1]], [g[1], g[0]]])


def _segment_B(a, b, J, eta, d):
    """B1, B2 (strain x 2d) for one segment at local coordinate eta."""
    N = np.array([(1 - eta) / 2, (1 + eta) / 2])
    dN = np.array([-0.5, 0.5])
    xb = N[0] * a + N[1] * b
    xe = 0.5 * (b - a)
    b1 = np.array([xe[1], -xe[0]]) / J
    b2 = np.array([-xb[1], xb[0]]) / J
    L1, L2 = _operator(b1, d), _operator(b2, d)
    B1 = np.hstack([L1 * N[i] for i in range(2)])
    B2 = np.hstack([L2 * dN[i] for i in range(2)])
    return B1, B2


def coefficient_matrices(geom, material, n_gauss=2):
    """Assemble E0, E1, E2 over the boundary segments.

    The integrands are quadratic in eta on straight segments, so the
    default 2-point rule is exact.
    """
    d = material.dofs_per_node
    n = geom.n_nodes
    size = n * d
    E0, E1, E2 = (np.zeros((size, size)) for _ in range(3))
    D = material.D
    rule = gauss_legendre(n_gauss)
    for s in range(n):
        a, b = geom.segments[s]
        J = geom.jacobian[s]
        idx = np.r_[s * d:(s + 1) * d, ((s + 1) % n) * d:((s + 1) % n + 1) * d]
        ix = np.ix_(idx, idx)
        for eta, w in zip(rule.points, rule.weights):
            B1, B2 = _segment_B(a, b, J, eta, d)
            E0[ix] += w * J * B1.T @ D @ B1
            E1[ix] += w * J * B2.T @ D @ B1
            E2[ix] += w * J * B2.T @ D @ B2
    E0 = 0.5 * (E0 + E0.T)
    E2 = 0.5 * (E2 + E2.T)
    try:
        np.linalg.cholesky(E0)
    except np.linalg.LinAlgError as exc:
        raise DegenerateGeometryError("E0 is not positive definite (collapsed segment?)") from exc
    return CoefficientMatrices(E0, E1, E2, d)


def hamiltonian(E):
    """Z = [[E0^-1 E1', -E0^-1], [E1 E0^-1 E1' - E2, -E1 E0^-1]]."""
    E0inv = np.linalg.inv(E.E0)
    A = E0inv @ E.E1.T
    Z = np.block([[A, -E0inv],
                  [E.E1 @ A - E.E2, -E.E1 @ E0inv]])
    cond = float(np.linalg.cond(E.E0))
    notes = []
    if cond > CONDITION_WARN:
        notes.append(f"E0 condition number {cond:.3e}")
        log.warning("ill-conditioned E0: %.3e", cond)
    return HamiltonianMatrix(Z, cond, notes)


def _dump_spectrum(lam):
    fd, path = tempfile.mkstemp(prefix="sbfem_spectrum_", suffix=".csv")
    with os.fdopen(fd, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["index", "real", "imag"])
        for i, v in enumerate(lam):
            w.writerow([i, v.real, v.imag])
    return path


def _constant_modes(n, d):
    modes = np.zeros((n * d, d))
    for c in range(d):
        modes[c::d, c] = 1.0
    return modes


def modal_solution(Z, dofs_per_node, tol_zero=TOL_ZERO):
    """Bounded-domain modes: Re(lambda) < 0 plus explicit constant modes.

    The lambda = 0 eigenvalues of Z form Jordan blocks that split
    numerically into small +- pairs; everything with
    ``|Re(lambda)| <= tol_zero * max|lambda|`` is discarded and replaced by
    constant displacement modes.
    """
    Z = getattr(Z, "Z", Z)
    size = Z.shape[0] // 2
    d = dofs_per_node
    lam, vec = np.linalg.eig(Z)
    scale = np.max(np.abs(lam))
    keep = np.flatnonzero(lam.real < -tol_zero * scale)
    if len(keep) != size - d:
        path = _dump_spectrum(lam)
        raise ModeSelectionError(
            f"selected {len(keep)} decaying modes, expected {size - d}; spectrum in {path}",
            dump_path=path)
    keep = keep[np.argsort(lam.real[keep])]
    phi = np.hstack([vec[:size, keep], _constant_modes(size // d, d)])
    lam_n = np.concatenate([lam[keep], np.zeros(d)])
    return ModalSolution(lam_n, phi, len(keep), float(np.linalg.cond(phi)), lam)


def stiffness_from_modes(E, modal):
    phi = modal.phi_u
    K = E.E1.T - E.E0 @ (phi * modal.eigenvalues) @ np.linalg.inv(phi)
    imag = np.abs(K.imag).max()
    K = K.real
    scale = np.abs(K).max()
    if imag > 1e-8 * scale:
        raise NumericalFailureError(f"complex stiffness (imag part {imag:.3e})")
    return K


def sbfem_element_stiffness(element, material, tol_zero=TOL_ZERO,
                            asymmetry_limit=ASYMMETRY_LIMIT, n_gauss=2, return_parts=False):
    geom = scaled_boundary_geometry(element)
    E = coefficient_matrices(geom, material, n_gauss)
    H = hamiltonian(E)
    modal = modal_solution(H.Z, material.dofs_per_node, tol_zero)
    K = stiffness_from_modes(E, modal)
    norm = np.linalg.norm(K)
    asym = float(np.linalg.norm(K - K.T) / norm)
    if asym > asymmetry_limit:
        raise NumericalFailureError(
            f"scaled boundary stiffness asymmetry {asym:.3e} exceeds {asymmetry_limit:g}")
    K = 0.5 * (K + K.T)
    info = {"asymmetry": asym, "phi_condition": modal.condition,
            "E0_condition": H.condition_E0}
    es = ElementStiffness(K, geom.node_ids, material.dofs_per_node, info)
    if return_parts:
        return es, geom, E, modal
    return es


def load_operator(modal, exponent=0):
    """Phi^-T (-Lambda + (k+2) I)^-1 Phi^T as a real matrix."""
    phi = modal.phi_u
    inv_t = np.linalg.inv(phi).T
    M = (inv_t / (-modal.eigenvalues + exponent + 2.0)) @ phi.T
    return M.real


def boundary_load(geom, material, intensity, n_gauss=2):
    """int N(eta)' b(eta) |J| d eta over all segments, b sampled at xi = 1."""
    d = material.dofs_per_node
    n = geom.n_nodes
    F = np.zeros(n * d)
    rule = gauss_legendre(n_gauss)
    eta = rule.points
    N = np.column_stack([(1 - eta) / 2, (1 + eta) / 2])
    a, b = geom.segments[:, 0], geom.segments[:, 1]
    pts = geom.centre + a[:, None, :] * N[None, :, 0, None] + b[:, None, :] * N[None, :, 1, None]
    vals = np.asarray(intensity(pts[..., 0], pts[..., 1]), dtype=float)
    vals = vals.reshape(n, len(eta), d)
    for s in range(n):
        contrib = np.einsum("g,gi,gc->ic", rule.weights * geom.jacobian[s], N, vals[s])
        F[s * d:(s + 1) * d] += contrib[0]
        t = (s + 1) % n
        F[t * d:(t + 1) * d] += contrib[1]
    return F


def _modes(geom, material):
    E = coefficient_matrices(geom, material)
    return modal_solution(hamiltonian(E).Z, material.dofs_per_node)


def sbfem_body_load(element, material, spec, modal=None):
    """Equivalent nodal load of a body force b = xi**k b(eta)."""
    geom = scaled_boundary_geometry(element)
    modal = modal or _modes(geom, material)
    F = boundary_load(geom, material, spec.intensity)
    return load_operator(modal, spec.exponent) @ F


def centre_plus_linear_load(element, material, intensity, modal=None, operators=None):
    """Equivalent nodal load of a general body force, exact for linear ones.

    Along every ray from the scaling centre O the force is replaced by
    ``b(O) + xi * (b(x_boundary) - b(O))``, a sum of an ``xi**0`` and an
    ``xi**1`` term. Any field that is linear in x and y is represented
    exactly; smooth fields are interpolated to second order in the cell
    size.

    ``operators`` may pass the precomputed pair
    ``(load_operator(modal, 0), load_operator(modal, 1))``.
    """
    geom = scaled_boundary_geometry(element)
    if operators is None:
        modal = modal or _modes(geom, material)
        operators = (load_operator(modal, 0), load_operator(modal, 1))
    op0, op1 = operators
    d = material.dofs_per_node
    b0 = np.asarray(intensity(np.array([geom.centre[0]]), np.array([geom.centre[1]])),
                    dtype=float).reshape(d)

    def constant(x, y):
        return np.broadcast_to(b0, np.shape(x) + (d,))

    def rest(x, y):
        return np.asarray(intensity(x, y), dtype=float).reshape(np.shape(x) + (d,)) - b0

    return op0 @ boundary_load(geom, material, constant) + op1 @ boundary_load(geom, material, rest)
