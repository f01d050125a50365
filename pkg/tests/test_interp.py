import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import UNIT_SQUARE, make_element, random_convex_polygon, regular_polygon
from qtfem.circle_quadrature import circle_aware_quadrature, empty_circumcircles
from qtfem.errors import NearSingularEvaluationError, TreatmentNotApplicableError
from qtfem.interp import (GuptaLineWarning, fan_quadrature, fem_element_stiffness,
                          gupta_shape, laplace_shape, pfem_element_stiffness)
from qtfem.material import Material
from qtfem.mesh import generate_mesh, polygon_area

GUPTA_NODES = np.array([[-1, -1], [1, -1], [1, 1], [-1, 1],
                        [0, -1], [1, 0], [0, 1], [-1, 0]], dtype=float)
MASKS = [tuple(bool(b >> i & 1) for i in range(4)) for b in range(16)]
BILINEAR_K = np.array([[4, -1, -2, -1], [-1, 4, -1, -2],
                       [-2, -1, 4, -1], [-1, -2, -1, 4]]) / 6.0

mask_strategy = st.tuples(*[st.booleans()] * 4)


def bilinear(x, y, x0=0.0, y0=0.0, w=1.0, h=1.0):
    s, t = (x - x0) / w, (y - y0) / h
    return np.array([(1 - s) * (1 - t), s * (1 - t), s * t, (1 - s) * t])


# -- transition elements -------------------------------------------------------

def test_gupta_centre_without_midside_nodes():
    N, _ = gupta_shape(0.0, 0.0)
    np.testing.assert_allclose(N[:4], 0.25)
    assert np.all(N[4:] == 0.0)


def test_gupta_midside_value():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", GuptaLineWarning)
        N, _ = gupta_shape(0.0, -1.0, (True, False, False, False))
    expected = np.zeros(8)
    expected[4] = 1.0
    np.testing.assert_array_equal(N, expected)


@pytest.mark.parametrize("mask", MASKS)
def test_gupta_kronecker_delta(mask):
    active = list(range(4)) + [4 + m for m in range(4) if mask[m]]
    for i in active:
        N, _ = gupta_shape(*GUPTA_NODES[i], mask, side=(1.0, 1.0))
        expected = np.zeros(8)
        expected[i] = 1.0
        np.testing.assert_array_equal(N, expected)


@settings(max_examples=30, deadline=None)
@given(mask_strategy)
def test_gupta_partition_of_unity_and_inactive(mask):
    rng = np.random.default_rng(sum(2 ** i for i, m in enumerate(mask) if m))
    xi, eta = rng.uniform(-1, 1, (2, 100))
    N, dN = gupta_shape(xi, eta, mask)
    assert np.max(np.abs(N.sum(axis=1) - 1.0)) <= 1e-14
    assert np.max(np.abs(dN.sum(axis=1))) <= 1e-14
    for m in range(4):
        if not mask[m]:
            assert np.all(N[:, 4 + m] == 0.0) and np.all(dN[:, 4 + m] == 0.0)
    # the interpolant of a linear field is exact
    u = GUPTA_NODES[:, 0] + 2 * GUPTA_NODES[:, 1]
    np.testing.assert_allclose(N @ u, xi + 2 * eta, atol=1e-14)


@pytest.mark.parametrize("mask", [MASKS[0], MASKS[5], MASKS[15]])
def test_gupta_gradients_against_finite_differences(mask, rng):
    pts = rng.uniform(0.05, 0.95, (40, 2)) * rng.choice([-1.0, 1.0], (40, 2))
    h = 1e-6
    _, dN = gupta_shape(pts[:, 0], pts[:, 1], mask)
    for a in range(2):
        e = np.zeros(2)
        e[a] = h
        Np, _ = gupta_shape(*(pts + e).T, mask)
        Nm, _ = gupta_shape(*(pts - e).T, mask)
        np.testing.assert_allclose(dN[..., a], (Np - Nm) / (2 * h), atol=1e-8)


def test_gupta_kink_line_warns_without_side():
    with pytest.warns(GuptaLineWarning):
        gupta_shape(0.0, 0.3, (True, False, False, False))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        _, left = gupta_shape(0.0, 0.3, (True, False, False, False), side=(-1.0, 1.0))
        _, right = gupta_shape(0.0, 0.3, (True, False, False, False), side=(1.0, 1.0))
    assert left[4, 0] == -right[4, 0] != 0.0


# -- Laplace interpolant ---------------------------------------------------------

def test_laplace_symmetric_points():
    N, _ = laplace_shape(UNIT_SQUARE, np.array([0.5, 0.5]))
    np.testing.assert_allclose(N, 0.25, atol=1e-15)
    N, _ = laplace_shape(regular_polygon(6), np.zeros(2))
    np.testing.assert_allclose(N, 1.0 / 6.0, atol=1e-15)


def test_laplace_equals_bilinear_on_rectangles(rng):
    rect = np.array([[1.0, 2.0], [3.5, 2.0], [3.5, 2.75], [1.0, 2.75]])
    for coords, (x0, y0, w, h) in ((UNIT_SQUARE, (0, 0, 1, 1)), (rect, (1, 2, 2.5, 0.75))):
        pts = np.array([x0, y0]) + rng.uniform(0.001, 0.999, (50, 2)) * [w, h]
        N, _ = laplace_shape(coords, pts)
        np.testing.assert_allclose(N, bilinear(pts[:, 0], pts[:, 1], x0, y0, w, h).T, atol=1e-10)


def test_laplace_invariants_on_random_polygons(rng):
    for _ in range(20):
        P = random_convex_polygon(rng)
        diam = np.ptp(P, axis=0).max()
        bary = rng.dirichlet(np.ones(len(P)), 50)
        pts = bary @ P
        N, dN = laplace_shape(P, pts)
        assert np.all(N >= -1e-14)
        assert np.max(np.abs(N.sum(axis=1) - 1)) <= 1e-12
        assert np.max(np.abs(N @ P - pts)) <= 1e-10 * diam
        assert np.max(np.abs(dN.sum(axis=1))) <= 1e-10 / diam
        # gradients of x and y are reproduced exactly
        np.testing.assert_allclose(np.einsum("i,mia->ma", P[:, 0], dN),
                                   np.tile([1.0, 0.0], (50, 1)), atol=1e-9)


def test_laplace_gradients_against_finite_differences(rng):
    for _ in range(10):
        P = random_convex_polygon(rng)
        pts = rng.dirichlet(np.ones(len(P)), 20) @ P
        _, dN = laplace_shape(P, pts)
        _, dF = laplace_shape(P, pts, finite_difference=True)
        scale = np.abs(dN).max()
        # points that fall on a gradient jump are rare; require 95% agreement
        close = np.all(np.abs(dN - dF) <= 1e-6 * scale, axis=(1, 2))
        assert close.mean() >= 0.95


def test_laplace_kronecker_delta_near_nodes():
    mesh = generate_mesh("corner", 1)
    for element in mesh.polygons:
        P = element.coords
        c = P.mean(axis=0)
        diam = element.diameter
        for i, v in enumerate(P):
            direction = (c - v) / np.linalg.norm(c - v)
            N, _ = laplace_shape(P, v + 1e-8 * diam * direction)
            assert N[i] >= 1 - 1e-4


@pytest.mark.parametrize("x", [[0.0, 0.0], [0.5, 0.0], [2.0, 0.5]])
def test_laplace_rejects_boundary_points(x):
    with pytest.raises(NearSingularEvaluationError):
        laplace_shape(UNIT_SQUARE, np.array(x))


# -- element stiffness ---------------------------------------------------------------

def test_fem_unit_square_stiffness():
    K = fem_element_stiffness(make_element(UNIT_SQUARE), Material.scalar()).matrix
    np.testing.assert_allclose(K, BILINEAR_K, atol=1e-14)


def test_fem_transition_elements_symmetric_zero_rows():
    for gen in ("corner", "diag", "grad"):
        for element in generate_mesh(gen, 3).polygons:
            K = fem_element_stiffness(element, Material.scalar()).matrix
            assert np.linalg.norm(K - K.T) <= 1e-13 * np.linalg.norm(K)
            assert np.abs(K.sum(axis=1)).max() <= 1e-12


def test_fem_rejects_multiple_hanging_nodes_per_edge():
    mesh = generate_mesh("corner", 2, balance=False)
    bad = [p for p in mesh.polygons if max(p.edge_counts) > 1][0]
    with pytest.raises(TreatmentNotApplicableError) as info:
        fem_element_stiffness(bad, Material.scalar())
    assert info.value.cell == bad.cell


def test_pfem_square_matches_fem():
    for quadrature in ("fan", "circles"):
        K = pfem_element_stiffness(make_element(UNIT_SQUARE), Material.scalar(),
                                   quadrature=quadrature).matrix
        np.testing.assert_allclose(K, BILINEAR_K, atol=1e-8)


def test_pfem_linear_consistency_and_zero_rows():
    mesh = generate_mesh("corner", 3, balance=False)
    for element in mesh.polygons:
        K = pfem_element_stiffness(element, Material.scalar()).matrix
        assert np.abs(K.sum(axis=1)).max() <= 1e-10
        assert np.linalg.norm(K - K.T) <= 1e-13 * np.linalg.norm(K)
        # energy of u = x equals its exact value (area times |grad u|^2)
        u = element.coords[:, 0]
        assert u @ K @ u == pytest.approx(element.area, rel=1e-7)


def test_pfem_rejects_unknown_quadrature():
    with pytest.raises(ValueError):
        pfem_element_stiffness(make_element(UNIT_SQUARE), Material.scalar(), quadrature="x")


# -- quadrature for Laplace polygons -----------------------------------------------------

def test_fan_quadrature_measures_area(rng):
    P = random_convex_polygon(rng)
    x, w = fan_quadrature(P)
    assert w.sum() == pytest.approx(polygon_area(P), rel=1e-13)


def test_empty_circumcircles_of_pentagon():
    P = np.array([[0, 0], [0.5, 0], [1, 0], [1, 1], [0, 1]], dtype=float)
    centres, radii = empty_circumcircles(P)
    for o, r in zip(centres, radii):
        assert np.all(np.hypot(*(P - o).T) >= r * (1 - 1e-10))


def test_circle_aware_quadrature_integrates_polynomials():
    mesh = generate_mesh("corner", 2, balance=False)
    for element in mesh.polygons:
        x, w = circle_aware_quadrature(element.coords, order=6)
        assert w.sum() == pytest.approx(element.area, rel=1e-9)
        xc = element.coords.mean(axis=0)
        exact = fan_quadrature(element.coords)
        f = lambda p: ((p - xc) ** 2).sum(axis=1)
        assert np.dot(w, f(x)) == pytest.approx(np.dot(exact[1], f(exact[0])), rel=1e-8)
