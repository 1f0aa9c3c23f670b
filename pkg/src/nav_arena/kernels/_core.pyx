# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: exact grid raycast, trajectory clearances, disc-grid overlap.

Keep the arithmetic in lockstep with ``_impl_py`` (same formulas, same tie
rule) so the backends agree to float rounding; the parity test enforces it.
"""
import numpy as np

cimport numpy as cnp
from libc.math cimport INFINITY, cos, fabs, floor, fmax, fmin, sin, sqrt

cnp.import_array()


def raycast_ranges(occ, double resolution, double ox, double oy, angles,
                   double range_max, circles=None):
    """See nav_arena.kernels._impl_py.raycast_ranges."""
    cdef cnp.ndarray[cnp.uint8_t, ndim=2, mode="c"] occ_arr = \
        np.ascontiguousarray(occ, dtype=np.uint8)
    cdef cnp.ndarray[cnp.float64_t, ndim=1, mode="c"] ang_arr = \
        np.ascontiguousarray(angles, dtype=np.float64)
    cdef Py_ssize_t n = ang_arr.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1, mode="c"] out = \
        np.full(n, range_max, dtype=np.float64)

    cdef cnp.ndarray[cnp.float64_t, ndim=2, mode="c"] circ_arr = None
    cdef Py_ssize_t m = 0
    if circles is not None and len(circles):
        circ_arr = np.ascontiguousarray(circles, dtype=np.float64)
        m = circ_arr.shape[0]

    cdef Py_ssize_t h = occ_arr.shape[0]
    cdef Py_ssize_t w = occ_arr.shape[1]
    cdef double res = resolution
    cdef long ix0 = <long>floor(ox / res)
    cdef long iy0 = <long>floor(oy / res)
    cdef bint start_occ = (0 <= ix0 < w and 0 <= iy0 < h and occ_arr[iy0, ix0] != 0)

    cdef Py_ssize_t i, j
    cdef double a, dx, dy, tdx, tdy, tmx, tmy, t, r
    cdef double relx, rely, c2, b, disc, tq
    cdef long ix, iy, stepx, stepy
    for i in range(n):
        if start_occ:
            out[i] = 0.0
            continue
        a = ang_arr[i]
        dx = cos(a)
        dy = sin(a)
        ix = ix0
        iy = iy0
        stepx = 1 if dx > 0.0 else (-1 if dx < 0.0 else 0)
        stepy = 1 if dy > 0.0 else (-1 if dy < 0.0 else 0)
        tdx = res / fabs(dx) if dx != 0.0 else INFINITY
        tdy = res / fabs(dy) if dy != 0.0 else INFINITY
        if dx > 0.0:
            tmx = ((ix0 + 1) * res - ox) / dx
        elif dx < 0.0:
            tmx = (ix0 * res - ox) / dx
        else:
            tmx = INFINITY
        if dy > 0.0:
            tmy = ((iy0 + 1) * res - oy) / dy
        elif dy < 0.0:
            tmy = (iy0 * res - oy) / dy
        else:
            tmy = INFINITY

        r = range_max
        while True:
            if tmx < tmy:
                t = tmx
                ix += stepx
                tmx += tdx
            else:
                t = tmy
                iy += stepy
                tmy += tdy
            if t >= range_max:
                break
            if ix < 0 or ix >= w or iy < 0 or iy >= h:
                break
            if occ_arr[iy, ix] != 0:
                r = t
                break

        # analytic circle hits, keep the nearest
        for j in range(m):
            relx = circ_arr[j, 0] - ox
            rely = circ_arr[j, 1] - oy
            c2 = relx * relx + rely * rely - circ_arr[j, 2] * circ_arr[j, 2]
            if c2 < 0.0:
                r = 0.0
                continue
            b = dx * relx + dy * rely
            disc = b * b - c2
            if disc >= 0.0:
                tq = b - sqrt(disc)
                if 0.0 < tq < r:
                    r = tq
        out[i] = fmin(fmax(r, 0.0), range_max)
    return out


def min_clearances(xs, ys, px, py):
    """See nav_arena.kernels._impl_py.min_clearances."""
    cdef cnp.ndarray[cnp.float64_t, ndim=2, mode="c"] xs_a = \
        np.ascontiguousarray(xs, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2, mode="c"] ys_a = \
        np.ascontiguousarray(ys, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1, mode="c"] px_a = \
        np.ascontiguousarray(px, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1, mode="c"] py_a = \
        np.ascontiguousarray(py, dtype=np.float64)
    cdef Py_ssize_t s = xs_a.shape[0]
    cdef Py_ssize_t t = xs_a.shape[1]
    cdef Py_ssize_t p = px_a.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1, mode="c"] out = \
        np.full(s, INFINITY, dtype=np.float64)
    if p == 0:
        return out
    cdef Py_ssize_t i, j, k
    cdef double best, dx, dy, d2
    for i in range(s):
        best = INFINITY
        for j in range(t):
            for k in range(p):
                dx = xs_a[i, j] - px_a[k]
                dy = ys_a[i, j] - py_a[k]
                d2 = dx * dx + dy * dy
                if d2 < best:
                    best = d2
        out[i] = sqrt(best)
    return out


def disc_hits_grid(occ, double resolution, double x, double y, double radius):
    """See nav_arena.kernels._impl_py.disc_hits_grid."""
    cdef cnp.ndarray[cnp.uint8_t, ndim=2, mode="c"] occ_arr = \
        np.ascontiguousarray(occ, dtype=np.uint8)
    cdef Py_ssize_t h = occ_arr.shape[0]
    cdef Py_ssize_t w = occ_arr.shape[1]
    cdef double res = resolution
    cdef long c0 = <long>floor((x - radius) / res)
    cdef long c1 = <long>floor((x + radius) / res)
    cdef long r0 = <long>floor((y - radius) / res)
    cdef long r1 = <long>floor((y + radius) / res)
    if c0 < 0:
        c0 = 0
    if r0 < 0:
        r0 = 0
    if c1 > w - 1:
        c1 = w - 1
    if r1 > h - 1:
        r1 = h - 1
    cdef long r, c
    cdef double nx, ny, dx, dy
    for r in range(r0, r1 + 1):
        for c in range(c0, c1 + 1):
            if occ_arr[r, c] != 0:
                nx = fmin(fmax(x, c * res), (c + 1) * res)
                ny = fmin(fmax(y, r * res), (r + 1) * res)
                dx = nx - x
                dy = ny - y
                if dx * dx + dy * dy < radius * radius:
                    return True
    return False
