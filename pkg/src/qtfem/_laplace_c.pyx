# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled Laplace shape-function kernel (see _laplace_py for the algorithm)."""
import numpy as np
cimport numpy as cnp
from libc.math cimport hypot, fabs

from .errors import NearSingularEvaluationError

cnp.import_array()

cdef enum:
    BOX = -1


cdef int _clip(double[:, ::1] poly, int[::1] lab, int k,
               double[:, ::1] out, int[::1] olab,
               double x0, double x1, double p0, double p1, int j,
               double[::1] f) noexcept nogil:
    cdef double dx = p0 - x0, dy = p1 - x1
    cdef double mx = 0.5 * (x0 + p0), my = 0.5 * (x1 + p1)
    cdef int i, ib, m = 0
    cdef double fa, fb, t
    for i in range(k):
        f[i] = (poly[i, 0] - mx) * dx + (poly[i, 1] - my) * dy
    for i in range(k):
        ib = i + 1
        if ib == k:
            ib = 0
        fa = f[i]
        fb = f[ib]
        if fa <= 0.0:
            out[m, 0] = poly[i, 0]
            out[m, 1] = poly[i, 1]
            olab[m] = lab[i]
            m += 1
            if fb > 0.0:
                t = fa / (fa - fb)
                out[m, 0] = poly[i, 0] + t * (poly[ib, 0] - poly[i, 0])
                out[m, 1] = poly[i, 1] + t * (poly[ib, 1] - poly[i, 1])
                olab[m] = j
                m += 1
        elif fb <= 0.0:
            t = fa / (fa - fb)
            out[m, 0] = poly[i, 0] + t * (poly[ib, 0] - poly[i, 0])
            out[m, 1] = poly[i, 1] + t * (poly[ib, 1] - poly[i, 1])
            olab[m] = lab[i]
            m += 1
    return m


cdef int _cell(const double[:, ::1] V, int n, double x0, double x1, double half,
               double[:, ::1] A, int[::1] la, double[:, ::1] B, int[::1] lb,
               double[::1] f, int* which) noexcept nogil:
    cdef int k = 4, j, t
    A[0, 0] = x0 - half; A[0, 1] = x1 - half
    A[1, 0] = x0 + half; A[1, 1] = x1 - half
    A[2, 0] = x0 + half; A[2, 1] = x1 + half
    A[3, 0] = x0 - half; A[3, 1] = x1 + half
    for t in range(4):
        la[t] = BOX
    which[0] = 0
    for j in range(n):
        if which[0] == 0:
            k = _clip(A, la, k, B, lb, x0, x1, V[j, 0], V[j, 1], j, f)
            which[0] = 1
        else:
            k = _clip(B, lb, k, A, la, x0, x1, V[j, 0], V[j, 1], j, f)
            which[0] = 0
    return k


def laplace_eval(verts, pts, bint want_grad=True):
    """Values (m, n) and gradients (m, n, 2) at points ``pts``."""
    cdef const double[:, ::1] V = np.ascontiguousarray(verts, dtype=np.float64)
    cdef const double[:, ::1] X = np.ascontiguousarray(np.atleast_2d(pts), dtype=np.float64)
    cdef int n = V.shape[0], m = X.shape[0]
    cdef int cap = 2 * n + 16
    cdef double[:, ::1] A = np.empty((cap, 2))
    cdef double[:, ::1] B = np.empty((cap, 2))
    cdef int[::1] la = np.empty(cap, dtype=np.intc)
    cdef int[::1] lb = np.empty(cap, dtype=np.intc)
    cdef double[::1] f = np.empty(cap)
    cdef double[::1] h = np.empty(n)
    cdef double[::1] s = np.empty(n)
    cdef double[:, ::1] ds = np.empty((n, 2))
    cdef double[:, ::1] da = np.empty((n, 2))
    vals_arr = np.empty((m, n))
    grads_arr = np.empty((m, n, 2)) if want_grad else np.empty((0, n, 2))
    cdef double[:, ::1] vals = vals_arr
    cdef double[:, :, ::1] grads = grads_arr
    cdef double[:, ::1] P
    cdef int[::1] L
    cdef int q, i, j, k, a, ip, inx, jp, jn, which, tries, bad
    cdef double xmin, xmax, ymin, ymax, diam, half, x0, x1, ex, ey, cross
    cdef double hmin, total, sa0, sa1, length, tx, ty, det
    cdef double a11, a12, a21, a22, cs0, cs1, ce0, ce1, dh
    cdef double[::1] lens = np.empty(cap)

    xmin = xmax = V[0, 0]
    ymin = ymax = V[0, 1]
    for i in range(n):
        xmin = min(xmin, V[i, 0]); xmax = max(xmax, V[i, 0])
        ymin = min(ymin, V[i, 1]); ymax = max(ymax, V[i, 1])
    diam = hypot(xmax - xmin, ymax - ymin)

    for q in range(m):
        x0 = X[q, 0]
        x1 = X[q, 1]
        for i in range(n):
            j = i + 1
            if j == n:
                j = 0
            ex = V[j, 0] - V[i, 0]
            ey = V[j, 1] - V[i, 1]
            cross = ex * (x1 - V[i, 1]) - ey * (x0 - V[i, 0])
            if cross <= 1e-13 * diam * hypot(ex, ey):
                raise NearSingularEvaluationError(
                    f"point {(x0, x1)} is not strictly inside the polygon")
        hmin = diam
        for j in range(n):
            h[j] = hypot(x0 - V[j, 0], x1 - V[j, 1])
            hmin = min(hmin, h[j])
        if hmin <= 1e-12 * diam:
            raise NearSingularEvaluationError(f"point {(x0, x1)} coincides with a vertex")

        half = 4.0 * diam
        tries = 0
        while True:
            k = _cell(V, n, x0, x1, half, A, la, B, lb, f, &which)
            if which == 1:
                P = B
                L = lb
            else:
                P = A
                L = la
            bad = 0
            for i in range(k):
                inx = i + 1
                if inx == k:
                    inx = 0
                lens[i] = hypot(P[inx, 0] - P[i, 0], P[inx, 1] - P[i, 1])
                if L[i] == BOX and lens[i] != 0.0:
                    bad = 1
            if not bad:
                break
            tries += 1
            if tries > 64:
                raise NearSingularEvaluationError("Voronoi cell of the point is unbounded")
            half *= 4.0

        for j in range(n):
            s[j] = 0.0
        for i in range(k):
            if L[i] != BOX:
                s[L[i]] += lens[i]
        total = 0.0
        for j in range(n):
            total += s[j] / h[j]
        for j in range(n):
            vals[q, j] = s[j] / h[j] / total
        if not want_grad:
            continue

        for j in range(n):
            ds[j, 0] = 0.0
            ds[j, 1] = 0.0
        for i in range(k):
            j = L[i]
            length = lens[i]
            if j == BOX or length == 0.0:
                continue
            inx = i + 1 if i + 1 < k else 0
            # start vertex on bisectors j, jp; end vertex on j, jn
            ip = i - 1 if i > 0 else k - 1
            while L[ip] == BOX:
                ip = ip - 1 if ip > 0 else k - 1
            jp = L[ip]
            ip = inx
            while L[ip] == BOX:
                ip = ip + 1 if ip + 1 < k else 0
            jn = L[ip]
            a11 = V[j, 0] - x0; a12 = V[j, 1] - x1
            a21 = V[jp, 0] - x0; a22 = V[jp, 1] - x1
            det = a11 * a22 - a12 * a21
            cs0 = (a22 - a12) / det; cs1 = (a11 - a21) / det
            a21 = V[jn, 0] - x0; a22 = V[jn, 1] - x1
            det = a11 * a22 - a12 * a21
            ce0 = (a22 - a12) / det; ce1 = (a11 - a21) / det
            tx = (P[inx, 0] - P[i, 0]) / length
            ty = (P[inx, 1] - P[i, 1]) / length
            for a in range(2):
                ex = P[inx, a] - X[q, a]
                ey = P[i, a] - X[q, a]
                ds[j, a] += tx * (ce0 * ex - cs0 * ey) + ty * (ce1 * ex - cs1 * ey)

        sa0 = 0.0
        sa1 = 0.0
        for j in range(n):
            for a in range(2):
                dh = (X[q, a] - V[j, a]) / h[j]
                da[j, a] = ds[j, a] / h[j] - s[j] * dh / (h[j] * h[j])
            sa0 += da[j, 0]
            sa1 += da[j, 1]
        for j in range(n):
            grads[q, j, 0] = (da[j, 0] - vals[q, j] * sa0) / total
            grads[q, j, 1] = (da[j, 1] - vals[q, j] * sa1) / total

    return vals_arr, (grads_arr if want_grad else None)
