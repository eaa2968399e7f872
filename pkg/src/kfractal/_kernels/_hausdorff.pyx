# cython: boundscheck=False, wraparound=False, cdivision=True
"""Directed max-min distance over point clouds (the hot kernel).

Scans every point of ``a`` for its nearest point in ``b`` and returns the
largest such minimum.  The inner loop aborts as soon as the running minimum
drops below the current maximum (that point can no longer raise the result),
which changes nothing about the final value.

Euclidean distances are accumulated and compared squared; the caller takes
the square root once.  The numpy fallback mirrors the arithmetic exactly, so
both backends return bitwise identical values.
"""

from libc.math cimport INFINITY, fabs


def directed_max_min(const double[:, ::1] a, const double[:, ::1] b, int chebyshev):
    cdef Py_ssize_t na = a.shape[0]
    cdef Py_ssize_t nb = b.shape[0]
    cdef Py_ssize_t d = a.shape[1]
    cdef Py_ssize_t i, j, t
    cdef double cmax = 0.0
    cdef double cmin, dist, diff

    if nb == 0:
        raise ValueError("empty target cloud")

    for i in range(na):
        cmin = INFINITY
        for j in range(nb):
            dist = 0.0
            if chebyshev:
                for t in range(d):
                    diff = fabs(a[i, t] - b[j, t])
                    if diff > dist:
                        dist = diff
            else:
                for t in range(d):
                    diff = a[i, t] - b[j, t]
                    dist += diff * diff
            if dist < cmax:
                cmin = -1.0
                break
            if dist < cmin:
                cmin = dist
        if cmin > cmax:
            cmax = cmin
    return cmax
