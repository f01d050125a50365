"""Model problems: patch-test boundary data and the Poisson benchmark.

The Poisson benchmark solves ``lap(u) = f`` on the unit square with
``u = 0`` on the boundary and exact solution

    u(x, y) = X(x) X(y),   X(t) = t**10 (1 - t) = t**10 - t**11.

With ``X'(t) = 10 t**9 - 11 t**10`` and ``X''(t) = 90 t**8 - 110 t**9``
the source is ``f = X''(x) X(y) + X(x) X''(y)``.
"""
import numpy as np


def patch_linear(x, y):
    return x + y


def patch_linear_gradient(x, y):
    return np.ones_like(x), np.ones_like(y)


def patch_quadratic(x, y):
    return 1.0 - x + 5.0 * y - 2.0 * x * y - 4.0 * x**2 + 4.0 * y**2


def patch_quadratic_gradient(x, y):
    return -1.0 - 2.0 * y - 8.0 * x, 5.0 - 2.0 * x + 8.0 * y


PATCH_CASES = {"A": patch_linear, "B": patch_quadratic}


def _X(t):
    return t**10 - t**11


def _dX(t):
    return 10.0 * t**9 - 11.0 * t**10


def _d2X(t):
    return 90.0 * t**8 - 110.0 * t**9


def poisson_exact(x, y):
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    return _X(x) * _X(y)


def poisson_exact_gradient(x, y):
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    return _dX(x) * _X(y), _X(x) * _dX(y)


def poisson_source(x, y):
    """Laplacian of :func:`poisson_exact`."""
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    return _d2X(x) * _X(y) + _X(x) * _d2X(y)
