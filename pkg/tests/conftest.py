"""Shared helpers for the test suite."""
import numpy as np
import pytest

from qtfem.mesh import PolygonElement


def make_element(coords, node_ids=None):
    """A free-standing polygon element (no mesh) from CCW coordinates."""
    coords = np.asarray(coords, dtype=float)
    x0, y0 = coords.min(axis=0)
    x1, y1 = coords.max(axis=0)
    ids = tuple(range(len(coords))) if node_ids is None else tuple(node_ids)
    return PolygonElement(ids, coords, None, (False,) * len(coords), (x0, y0, x1, y1))


def random_convex_polygon(rng, n_min=3, n_max=9):
    """Convex polygon with random vertices on a perturbed ellipse, CCW."""
    n = int(rng.integers(n_min, n_max + 1))
    while True:
        ang = np.sort(rng.uniform(0.0, 2 * np.pi, n))
        if np.min(np.diff(np.r_[ang, ang[0] + 2 * np.pi])) > 0.15:
            break
    a, b = rng.uniform(0.5, 2.0, 2)
    pts = np.column_stack([a * np.cos(ang), b * np.sin(ang)]) + rng.uniform(-3, 3, 2)
    return pts


def regular_polygon(n, radius=1.0):
    ang = 2 * np.pi * np.arange(n) / n
    return radius * np.column_stack([np.cos(ang), np.sin(ang)])


UNIT_SQUARE = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# -- acceptance summary --------------------------------------------------------

ACCEPTANCE_LINES = []
SUITE_BUDGET = 60.0


def record_criterion(label, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'}  {label}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def pytest_sessionstart(session):
    import time
    session.config._qtfem_start = time.perf_counter()


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    import time
    elapsed = time.perf_counter() - config._qtfem_start
    if not ACCEPTANCE_LINES:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for line in ACCEPTANCE_LINES:
        tr.write_line(line)
    n_tests = tr._numcollected
    if n_tests > 100:  # only meaningful for a full-suite run
        ok = elapsed < SUITE_BUDGET
        tr.write_line(f"{'PASS' if ok else 'FAIL'}  criterion 6 (runtime): full suite "
                      f"{elapsed:.1f} s (budget {SUITE_BUDGET:.0f} s)")
    tr.write_line("N/A   criterion 7: bimaterial enrichment study not reproduced (out of scope)")
