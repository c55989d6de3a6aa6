# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: KNN sweep and layout force loop.

Contract documented in ``_fallback``; both backends must stay in lockstep.
"""

from libc.math cimport sqrt, sin, cos, floor, isfinite

import numpy as np

BACKEND = "native"

cdef double HASH_A = 12.9898
cdef double HASH_B = 78.233
cdef double HASH_C = 43758.5453
cdef double TWO_PI = 6.283185307179586


cdef inline double pair_angle(Py_ssize_t lo, Py_ssize_t hi) nogil:
    cdef double t = sin(lo * HASH_A + hi * HASH_B) * HASH_C
    return TWO_PI * (t - floor(t))


def knn_query(points, Py_ssize_t qi, Py_ssize_t k):
    """See ``_fallback.knn_query``."""
    cdef double[:, ::1] pts = np.ascontiguousarray(points, dtype=np.float64)
    cdef Py_ssize_t n = pts.shape[0]
    cdef Py_ssize_t m = k if k < n else n
    cdef double[::1] d2 = np.empty(n, dtype=np.float64)
    cdef Py_ssize_t i, s, best, key
    cdef double dx, dy, dkey, radius2

    for i in range(n):
        dx = pts[i, 0] - pts[qi, 0]
        dy = pts[i, 1] - pts[qi, 1]
        d2[i] = dx * dx + dy * dy

    sel_arr = np.empty(m, dtype=np.intp)
    cdef Py_ssize_t[::1] sel = sel_arr
    chosen_arr = np.zeros(n, dtype=np.uint8)
    cdef unsigned char[::1] chosen = chosen_arr

    sel[0] = qi
    chosen[qi] = 1
    for s in range(1, m):
        best = -1
        for i in range(n):
            if chosen[i]:
                continue
            if best < 0 or d2[i] < d2[best] or (d2[i] == d2[best] and i < best):
                best = i
        sel[s] = best
        chosen[best] = 1

    # insertion sort of the selection by (distance, index)
    for s in range(1, m):
        key = sel[s]
        dkey = d2[key]
        i = s - 1
        while i >= 0 and (d2[sel[i]] > dkey or (d2[sel[i]] == dkey and sel[i] > key)):
            sel[i + 1] = sel[i]
            i -= 1
        sel[i + 1] = key

    radius2 = 0.0
    for s in range(m):
        if d2[sel[s]] > radius2:
            radius2 = d2[sel[s]]
    return sel_arr, sqrt(radius2)


def knn_all(points, Py_ssize_t k):
    """See ``_fallback.knn_all``."""
    pts = np.ascontiguousarray(points, dtype=np.float64)
    cdef Py_ssize_t n = pts.shape[0]
    cdef Py_ssize_t m = k if k < n else n
    idx = np.empty((n, m), dtype=np.intp)
    radii = np.empty(n, dtype=np.float64)
    cdef Py_ssize_t qi
    for qi in range(n):
        sel, radius = knn_query(pts, qi, k)
        idx[qi] = sel
        radii[qi] = radius
    return idx, radii


def layout_run(pos, vel, masses, double image_mass, double dt, double damping,
               Py_ssize_t max_iter, double eps, double r_min, double ke_guard):
    """See ``_fallback.layout_run``."""
    p_arr = np.array(pos, dtype=np.float64, copy=True, order="C")
    v_arr = np.array(vel, dtype=np.float64, copy=True, order="C")
    m_arr = np.ascontiguousarray(masses, dtype=np.float64)
    cdef double[:, ::1] p = p_arr
    cdef double[:, ::1] v = v_arr
    cdef double[::1] mass = m_arr
    cdef Py_ssize_t n = p.shape[0]

    force_arr = np.zeros((n, 2), dtype=np.float64)
    cdef double[:, ::1] force = force_arr

    cdef Py_ssize_t it = 0, i, j, lo, hi
    cdef bint converged = False, finite = True
    cdef double eps2 = eps * eps
    cdef double dx, dy, r, rc, mag, ux, uy, ang, sign, rad
    cdef double fx, fy, sx, sy, max_disp2, disp2, ke

    for it in range(1, max_iter + 1):
        for i in range(n):
            fx = 0.0
            fy = 0.0
            for j in range(n):
                if j == i:
                    continue
                dx = p[i, 0] - p[j, 0]
                dy = p[i, 1] - p[j, 1]
                r = sqrt(dx * dx + dy * dy)
                if r == 0.0:
                    if i < j:
                        lo = i; hi = j; sign = 1.0
                    else:
                        lo = j; hi = i; sign = -1.0
                    ang = pair_angle(lo, hi)
                    ux = sign * cos(ang)
                    uy = sign * sin(ang)
                else:
                    ux = dx / r
                    uy = dy / r
                rc = r if r > r_min else r_min
                mag = mass[i] * mass[j] / (rc * rc)
                fx += mag * ux
                fy += mag * uy
            rad = sqrt(p[i, 0] * p[i, 0] + p[i, 1] * p[i, 1])
            fx -= image_mass * mass[i] * rad * p[i, 0]
            fy -= image_mass * mass[i] * rad * p[i, 1]
            force[i, 0] = fx
            force[i, 1] = fy

        max_disp2 = 0.0
        ke = 0.0
        finite = True
        for i in range(n):
            v[i, 0] = damping * (v[i, 0] + force[i, 0] / mass[i] * dt)
            v[i, 1] = damping * (v[i, 1] + force[i, 1] / mass[i] * dt)
            sx = v[i, 0] * dt
            sy = v[i, 1] * dt
            p[i, 0] = p[i, 0] + sx
            p[i, 1] = p[i, 1] + sy
            disp2 = sx * sx + sy * sy
            if disp2 > max_disp2:
                max_disp2 = disp2
            ke += mass[i] * (v[i, 0] * v[i, 0] + v[i, 1] * v[i, 1])
            if not (isfinite(p[i, 0]) and isfinite(p[i, 1])
                    and isfinite(v[i, 0]) and isfinite(v[i, 1])):
                finite = False
        ke *= 0.5
        if not finite:
            return p_arr, v_arr, it, False, False
        if max_disp2 < eps2 and ke < ke_guard:
            converged = True
            break

    return p_arr, v_arr, it, converged, finite
