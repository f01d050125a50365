import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import UNIT_SQUARE, make_element, random_convex_polygon, regular_polygon
from oracles import condensed_fine_stiffness
from qtfem.errors import DegenerateGeometryError, ModeSelectionError
from qtfem.interp import fan_quadrature, fem_element_stiffness
from qtfem.material import Material
from qtfem.mesh import Domain, QuadtreeMesh, generate_mesh
from qtfem.quadrature import tensor_gauss_rule
from qtfem.sbfem import (BodyLoadSpec, centre_plus_linear_load, CoefficientMatrices, coefficient_matrices, hamiltonian,
                         modal_solution, sbfem_body_load, sbfem_element_stiffness,
                         scaled_boundary_geometry)

SCALAR = Material.scalar()
ELASTIC = Material.plane_strain(2.0, 0.3)


def kernel_dimension(K):
    ev = np.linalg.eigvalsh(K)
    return int(np.sum(np.abs(ev) < 1e-8 * np.abs(ev).max()))


def test_geometry_of_unit_square():
    g = scaled_boundary_geometry(make_element(UNIT_SQUARE))
    np.testing.assert_allclose(g.centre, [0.5, 0.5])
    assert len(g.segments) == 4
    assert g.signed_area() == pytest.approx(1.0)


def test_geometry_of_transition_cell():
    leaves = [(2, 1, 1)] + [(3, 2 * i + p, 2 * j + q) for i in range(4) for j in range(4)
                            if (i, j) != (1, 1) for p in (0, 1) for q in (0, 1)]
    cell = [p for p in QuadtreeMesh.from_leaves(Domain(), leaves).polygons if p.n == 8][0]
    g = scaled_boundary_geometry(cell)
    assert len(g.segments) == 8
    np.testing.assert_allclose(g.centre, [0.375, 0.375], atol=1e-15)


def test_degenerate_polygon_rejected():
    with pytest.raises(DegenerateGeometryError):
        scaled_boundary_geometry(np.array([[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]]))


def test_coefficient_matrices_properties():
    E = coefficient_matrices(scaled_boundary_geometry(make_element(UNIT_SQUARE)), SCALAR)
    assert np.linalg.eigvalsh(E.E0).min() > 0
    assert np.linalg.eigvalsh(E.E2).min() > -1e-14
    assert np.abs(E.E2.sum(axis=1)).max() <= 1e-14


def test_coefficient_matrices_scale_invariant_and_exact(rng):
    P = random_convex_polygon(rng, 5, 8)
    for material in (SCALAR, ELASTIC):
        ref = coefficient_matrices(scaled_boundary_geometry(P), material, n_gauss=20)
        for s in (1.0, 0.01, 37.0):
            E = coefficient_matrices(scaled_boundary_geometry(s * P + 5.0), material)
            for A, B in ((E.E0, ref.E0), (E.E1, ref.E1), (E.E2, ref.E2)):
                np.testing.assert_allclose(A, B, atol=1e-12 * np.abs(B).max())


def test_hamiltonian_blocks_and_pairing(rng):
    for _ in range(5):
        n = 6
        A = rng.normal(size=(n, n))
        E0 = A @ A.T + n * np.eye(n)
        C = rng.normal(size=(n, n))
        E2 = C @ C.T
        E1 = rng.normal(size=(n, n))
        H = hamiltonian(CoefficientMatrices(E0, E1, E2, 1))
        np.testing.assert_array_equal(H.Z[:n, n:], -np.linalg.inv(E0))
        lam = np.sort(np.linalg.eigvals(H.Z).real)
        np.testing.assert_allclose(lam, -lam[::-1], atol=1e-8 * np.abs(lam).max())


def test_unit_square_spectrum_and_modes():
    es, geom, E, modal = sbfem_element_stiffness(make_element(UNIT_SQUARE), SCALAR,
                                                 return_parts=True)
    lam = np.linalg.eigvals(hamiltonian(E).Z)
    assert np.sum(np.abs(lam) < 1e-8) == 2  # one +- zero pair
    assert modal.n_genuine == 3 and modal.n_modes == 4
    u_b = np.array([0.3, -1.0, 2.0, 0.5])
    np.testing.assert_allclose(modal.phi_u @ modal.integration_constants(u_b), u_b, atol=1e-12)
    Z = hamiltonian(E).Z
    full = np.linalg.eig(Z)
    for k in range(modal.n_genuine):
        j = np.argmin(np.abs(full[0] - modal.eigenvalues[k]))
        v = full[1][:, j]
        assert np.linalg.norm(Z @ v - modal.eigenvalues[k] * v) <= 1e-8 * np.linalg.norm(v)


def test_unit_square_equals_bilinear_and_condensed_reference():
    K = sbfem_element_stiffness(make_element(UNIT_SQUARE), SCALAR).matrix
    K_fem = fem_element_stiffness(make_element(UNIT_SQUARE), SCALAR).matrix
    np.testing.assert_allclose(K, K_fem, atol=1e-12)
    ref = condensed_fine_stiffness(16)
    assert np.linalg.norm(K - ref) / np.linalg.norm(ref) <= 1e-3


@pytest.mark.parametrize("material,dim", [(SCALAR, 1), (ELASTIC, 3)])
def test_kernel_dimension(material, dim):
    for element in generate_mesh("corner", 3, balance=False).polygons[:12]:
        K = sbfem_element_stiffness(element, material).matrix
        assert kernel_dimension(K) == dim


def test_plane_strain_mode_count():
    P = regular_polygon(6)
    _, _, _, modal = sbfem_element_stiffness(make_element(P), ELASTIC, return_parts=True)
    # the rotation is a genuine decaying mode; only the two translations are appended
    assert modal.n_genuine == 2 * len(P) - 2
    assert modal.n_modes == 2 * len(P)


def test_mode_selection_failure(tmp_path, monkeypatch):
    monkeypatch.setenv("TMPDIR", str(tmp_path))
    import tempfile
    monkeypatch.setattr(tempfile, "tempdir", str(tmp_path))
    E = coefficient_matrices(scaled_boundary_geometry(UNIT_SQUARE), SCALAR)
    with pytest.raises(ModeSelectionError) as info:
        modal_solution(hamiltonian(E).Z, 2)
    assert info.value.dump_path.startswith(str(tmp_path))


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10_000))
def test_stiffness_invariants_random_polygons(seed):
    rng = np.random.default_rng(seed)
    P = random_convex_polygon(rng)
    K = sbfem_element_stiffness(make_element(P), SCALAR).matrix
    assert np.linalg.norm(K - K.T) <= 1e-8 * np.linalg.norm(K)
    assert np.abs(K.sum(axis=1)).max() <= 1e-10 * np.abs(K).max()
    # rigid motion leaves the spectrum unchanged
    t = rng.uniform(0, 2 * np.pi)
    R = np.array([[np.cos(t), -np.sin(t)], [np.sin(t), np.cos(t)]])
    K2 = sbfem_element_stiffness(make_element(P @ R.T + rng.normal(size=2)), SCALAR).matrix
    np.testing.assert_allclose(np.linalg.eigvalsh(K2), np.linalg.eigvalsh(K),
                               atol=1e-10 * np.abs(K).max())


def test_linear_field_has_constant_flux():
    # K u for u linear equals the consistent boundary flux of the constant gradient
    P = regular_polygon(5)
    K = sbfem_element_stiffness(make_element(P), SCALAR).matrix
    u = P[:, 0]
    flux = np.zeros(len(P))
    for k in range(len(P)):
        a, b = P[k], P[(k + 1) % len(P)]
        nx = b[1] - a[1]  # outward normal times length, x component
        flux[k] += 0.5 * nx
        flux[(k + 1) % len(P)] += 0.5 * nx
    np.testing.assert_allclose(K @ u, flux, atol=1e-12)


def test_body_load_zero_and_constant(rng):
    for _ in range(5):
        P = random_convex_polygon(rng)
        element = make_element(P)
        zero = sbfem_body_load(element, SCALAR, BodyLoadSpec(lambda x, y: 0 * x))
        assert np.all(zero == 0.0)
        p = sbfem_body_load(element, SCALAR, BodyLoadSpec(lambda x, y: 3.0 + 0 * x))
        assert p.sum() == pytest.approx(3.0 * element.area, rel=1e-10)
    elastic = sbfem_body_load(make_element(UNIT_SQUARE), ELASTIC,
                              BodyLoadSpec(lambda x, y: np.stack([1 + 0 * x, -2 + 0 * x], -1)))
    np.testing.assert_allclose([elastic[0::2].sum(), elastic[1::2].sum()], [1.0, -2.0])


def _bilinear_load(b):
    rule = tensor_gauss_rule(10)
    s, t = 0.5 * (rule.points.T + 1)
    w = 0.25 * rule.weights
    N = np.array([(1 - s) * (1 - t), s * (1 - t), s * t, (1 - s) * t])
    return N @ (w * b(s, t))


def test_body_load_linear_source_close_to_fem():
    b = lambda x, y: 1.0 + 2.0 * x - y
    element = make_element(UNIT_SQUARE)
    ref = _bilinear_load(b)
    p = centre_plus_linear_load(element, SCALAR, b)
    assert np.abs(p - ref).max() <= 0.05 * np.abs(ref).max()
    # on the square the scaled boundary field is bilinear, so the load is the FEM one
    np.testing.assert_allclose(p, ref, atol=1e-13)
    # the single xi**0 term keeps the total but not the distribution
    p0 = sbfem_body_load(element, SCALAR, BodyLoadSpec(b))
    assert p0.sum() == pytest.approx(ref.sum(), rel=1e-12)


def test_body_load_exact_for_linear_sources_on_polygons(rng):
    # constants and linear fields lie in the element space, so u^T p must
    # equal the integral of u * b for them
    for _ in range(5):
        P = random_convex_polygon(rng)
        c = rng.normal(size=3)
        b = lambda x, y: c[0] + c[1] * x + c[2] * y
        p = centre_plus_linear_load(make_element(P), SCALAR, b)
        x, w = fan_quadrature(P)
        for u in (lambda x, y: 1.0 + 0 * x, lambda x, y: x, lambda x, y: 2 * y - x):
            exact = np.dot(w, u(*x.T) * b(*x.T))
            assert u(*P.T) @ p == pytest.approx(exact, rel=1e-10, abs=1e-12)
