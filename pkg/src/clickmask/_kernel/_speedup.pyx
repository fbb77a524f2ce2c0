# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled evolution kernel; arithmetic mirrors reference.py element by element."""

import numpy as np

cimport numpy as cnp
from libc.math cimport sin, sqrt

cnp.import_array()

BACKEND = "compiled"

cdef double PI = 3.141592653589793


cdef inline double _dwr(double s) noexcept nogil:
    # p'(s)/s of the double-well potential, continuous at 0 and 1
    cdef double y
    if s <= 1.0:
        if s == 0.0:
            return 1.0
        y = PI * (2.0 * s)
        return sin(y) / y
    return (s - 1.0) / s


def step_forces(cnp.ndarray[cnp.float64_t, ndim=2] phi,
                cnp.ndarray[cnp.float64_t, ndim=2] g,
                double mu, double area_coef, double ed_coef,
                double epsilon, double grad_floor=1e-8):
    """Same contract as reference.step_forces, computed in tight C loops."""
    cdef Py_ssize_t h = phi.shape[0]
    cdef Py_ssize_t w = phi.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] rx = np.empty((h, w))
    cdef cnp.ndarray[cnp.float64_t, ndim=2] ry = np.empty((h, w))
    cdef cnp.ndarray[cnp.float64_t, ndim=2] ex = np.empty((h, w))
    cdef cnp.ndarray[cnp.float64_t, ndim=2] ey = np.empty((h, w))
    cdef cnp.ndarray[cnp.float64_t, ndim=2] fa = np.empty((h, w))
    cdef cnp.ndarray[cnp.float64_t, ndim=2] ds = np.empty((h, w))
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.empty((h, w))
    cdef Py_ssize_t r, c, cl, cr, ru, rd
    cdef double gx, gy, s, sf, dps, d, dd, f_reg, f_ed, eps2, p
    cdef double vxl, vxr, vyu, vyd

    eps2 = epsilon * epsilon

    # pass 1: gradient of phi, flux fields, pointwise terms
    for r in range(h):
        ru = r - 1 if r > 0 else 0
        rd = r + 1 if r < h - 1 else h - 1
        for c in range(w):
            cl = c - 1 if c > 0 else 0
            cr = c + 1 if c < w - 1 else w - 1
            gx = (phi[r, cr] - phi[r, cl]) * 0.5
            gy = (phi[rd, c] - phi[ru, c]) * 0.5
            s = sqrt(gx * gx + gy * gy)
            dps = _dwr(s)
            rx[r, c] = dps * gx
            ry[r, c] = dps * gy
            p = phi[r, c]
            d = (epsilon / PI) / (eps2 + p * p)
            fa[r, c] = g[r, c] * d
            sf = s if s > grad_floor else grad_floor
            ex[r, c] = d * (gx / sf)
            ey[r, c] = d * (gy / sf)
            dd = -(2.0 * epsilon / PI) * p / ((eps2 + p * p) * (eps2 + p * p))
            ds[r, c] = dd * s

    # pass 2: zero-flux divergences, then the same term grouping as reference.py
    for r in range(h):
        for c in range(w):
            vxl = -rx[r, 0] if c == 0 else rx[r, c - 1]
            vxr = -rx[r, w - 1] if c == w - 1 else rx[r, c + 1]
            vyu = -ry[0, c] if r == 0 else ry[r - 1, c]
            vyd = -ry[h - 1, c] if r == h - 1 else ry[r + 1, c]
            f_reg = (vxr - vxl) * 0.5 + (vyd - vyu) * 0.5

            vxl = -ex[r, 0] if c == 0 else ex[r, c - 1]
            vxr = -ex[r, w - 1] if c == w - 1 else ex[r, c + 1]
            vyu = -ey[0, c] if r == 0 else ey[r - 1, c]
            vyd = -ey[h - 1, c] if r == h - 1 else ey[r + 1, c]
            f_ed = ((vxr - vxl) * 0.5 + (vyd - vyu) * 0.5) - ds[r, c]

            out[r, c] = mu * f_reg + area_coef * fa[r, c] + ed_coef * f_ed

    return out
