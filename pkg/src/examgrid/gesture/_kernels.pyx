# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: Gaussian potential fields and template energy.

Semantics match _kernels_py.py exactly; see that module for the contract.
"""

from libc.math cimport ceil, cos, exp, sin, sqrt, floor, M_PI

import numpy as np

BACKEND = "compiled"


cdef inline Py_ssize_t _clamp(Py_ssize_t i, Py_ssize_t n) nogil:
    if i < 0:
        return 0
    if i >= n:
        return n - 1
    return i


def gaussian_fields(img, double sigma):
    cdef double[:, ::1] src = np.ascontiguousarray(img, dtype=np.float64)
    cdef Py_ssize_t h = src.shape[0]
    cdef Py_ssize_t w = src.shape[1]
    cdef Py_ssize_t radius = <Py_ssize_t>ceil(3.0 * sigma)
    if radius < 1:
        radius = 1
    cdef Py_ssize_t ksize = 2 * radius + 1

    # Unnormalized taps; each pass divides its accumulator by the tap sum
    # once at the end, so constant images smooth to themselves bit-exactly.
    kern_arr = np.empty(ksize, dtype=np.float64)
    cdef double[::1] kern = kern_arr
    cdef double total = 0.0
    cdef Py_ssize_t j, k
    for j in range(ksize):
        k = j - radius
        kern[j] = exp(-(<double>k * <double>k) / (2.0 * sigma * sigma))
        total += kern[j]

    tmp_arr = np.empty((h, w), dtype=np.float64)
    smooth_arr = np.empty((h, w), dtype=np.float64)
    valley_arr = np.empty((h, w), dtype=np.float64)
    edge_arr = np.empty((h, w), dtype=np.float64)
    cdef double[:, ::1] tmp = tmp_arr
    cdef double[:, ::1] smooth = smooth_arr
    cdef double[:, ::1] valley = valley_arr
    cdef double[:, ::1] edge = edge_arr

    cdef Py_ssize_t x, y
    cdef double acc, gx, gy
    with nogil:
        for y in range(h):
            for x in range(w):
                acc = 0.0
                for j in range(ksize):
                    acc += kern[j] * src[y, _clamp(x + j - radius, w)]
                tmp[y, x] = acc / total
        for y in range(h):
            for x in range(w):
                acc = 0.0
                for j in range(ksize):
                    acc += kern[j] * tmp[_clamp(y + j - radius, h), x]
                smooth[y, x] = acc / total
        for y in range(h):
            for x in range(w):
                valley[y, x] = 1.0 - smooth[y, x]
        for y in range(h):
            for x in range(w):
                gx = (smooth[y, _clamp(x + 1, w)] - smooth[y, _clamp(x - 1, w)]) * 0.5
                gy = (smooth[_clamp(y + 1, h), x] - smooth[_clamp(y - 1, h), x]) * 0.5
                edge[y, x] = sqrt(gx * gx + gy * gy)
    return valley_arr, edge_arr


cdef inline double _bilinear(double[:, ::1] field, double x, double y) nogil:
    cdef Py_ssize_t h = field.shape[0]
    cdef Py_ssize_t w = field.shape[1]
    cdef double fx0 = floor(x)
    cdef double fy0 = floor(y)
    cdef Py_ssize_t x0 = <Py_ssize_t>fx0
    cdef Py_ssize_t y0 = <Py_ssize_t>fy0
    cdef double fx = x - fx0
    cdef double fy = y - fy0
    cdef double acc = 0.0
    if 0 <= x0 < w and 0 <= y0 < h:
        acc += (1.0 - fx) * (1.0 - fy) * field[y0, x0]
    if 0 <= x0 + 1 < w and 0 <= y0 < h:
        acc += fx * (1.0 - fy) * field[y0, x0 + 1]
    if 0 <= x0 < w and 0 <= y0 + 1 < h:
        acc += (1.0 - fx) * fy * field[y0 + 1, x0]
    if 0 <= x0 + 1 < w and 0 <= y0 + 1 < h:
        acc += fx * fy * field[y0 + 1, x0 + 1]
    return acc


def energy_eval(valley, edge,
                double cx, double cy, double s, double phi, double e, double m,
                double w1, double w2, double w3, double w4, double w5,
                double e0, double m0, int n_ell):
    # The boundary ring samples the valley field: the face outline is a dark
    # line, whose valley ridge sits exactly on the boundary (the gradient
    # magnitude peaks ~2 px to either side and would bias the scale).
    cdef double[:, ::1] v = valley
    cdef double cphi = cos(phi)
    cdef double sphi = sin(phi)
    cdef double ring = 0.0, eyes = 0.0, mouth = 0.0
    cdef double t, lx, ly
    cdef int i
    with nogil:
        for i in range(n_ell):
            t = 2.0 * M_PI * i / n_ell
            lx = 0.7 * s * cos(t)
            ly = s * sin(t)
            ring += _bilinear(v, cx + lx * cphi - ly * sphi, cy + lx * sphi + ly * cphi)
        ring /= n_ell

        ly = -0.35 * s
        lx = -e * s
        eyes += _bilinear(v, cx + lx * cphi - ly * sphi, cy + lx * sphi + ly * cphi)
        lx = e * s
        eyes += _bilinear(v, cx + lx * cphi - ly * sphi, cy + lx * sphi + ly * cphi)
        eyes /= 2.0

        ly = m * s
        for i in range(9):
            lx = -0.3 * s + (0.6 * s) * i / 8.0
            mouth += _bilinear(v, cx + lx * cphi - ly * sphi, cy + lx * sphi + ly * cphi)
        mouth /= 9.0

    return (-w1 * ring - w2 * eyes - w3 * mouth
            + w4 * ((e - e0) * (e - e0) + (m - m0) * (m - m0))
            + w5 * phi * phi)
