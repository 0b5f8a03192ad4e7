# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels; same contracts as ``_kernels_py``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, sqrt

cnp.import_array()

NAME = "cython"


def threshold_sizes(const double[::1] s):
    cdef Py_ssize_t n = s.shape[0]
    cdef Py_ssize_t half = (n + 1) // 2
    cdef Py_ssize_t tau, tp, tau_o = half + 1
    cdef double acc = 0.0, score, best = -1.0, r_o
    cdef double[::1] prefix = np.empty(n, dtype=np.float64)
    cdef Py_ssize_t i
    for i in range(n):
        acc = acc + s[i] * s[i]
        prefix[i] = acc
    for tau in range(half + 1, n + 1):
        tp = tau - half
        score = fabs(s[tau - 1] * s[tau - 1] - prefix[tp - 1] / <double>tp)
        if best < 0.0 or score < best:
            best = score
            tau_o = tau
    r_o = s[tau_o - 1]
    for tau in range(n, 0, -1):
        if s[tau - 1] <= 2.0 * <double>tau * r_o / <double>tau_o:
            return tau_o, tau
    return tau_o, tau_o


def weiszfeld(points, x0, Py_ssize_t max_iter, double step_tol, double sing_eps):
    cdef double[:, ::1] pts = np.ascontiguousarray(points, dtype=np.float64)
    cdef Py_ssize_t k = pts.shape[0], p = pts.shape[1]
    x_arr = np.array(x0, dtype=np.float64, copy=True)
    cdef double[::1] x = x_arr
    cdef double[::1] num = np.empty(p, dtype=np.float64)
    cdef double[::1] pull = np.empty(p, dtype=np.float64)
    cdef double[::1] dist = np.empty(k, dtype=np.float64)
    cdef Py_ssize_t it, i, d, j, mult
    cdef double acc, wsum, w, dmin, step, r, shrink, v
    cdef bint near
    for it in range(1, max_iter + 1):
        near = False
        j = 0
        dmin = -1.0
        for i in range(k):
            acc = 0.0
            for d in range(p):
                v = pts[i, d] - x[d]
                acc = acc + v * v
            dist[i] = sqrt(acc)
            if dist[i] < sing_eps:
                near = True
            if dmin < 0.0 or dist[i] < dmin:
                dmin = dist[i]
                j = i
        for d in range(p):
            num[d] = 0.0
        wsum = 0.0
        if near:
            # distances and unit pulls measured from input point j
            mult = 0
            for d in range(p):
                pull[d] = 0.0
            for i in range(k):
                acc = 0.0
                for d in range(p):
                    v = pts[i, d] - pts[j, d]
                    acc = acc + v * v
                dist[i] = sqrt(acc)
                if dist[i] < sing_eps:
                    mult += 1
                else:
                    w = 1.0 / dist[i]
                    wsum = wsum + w
                    for d in range(p):
                        num[d] = num[d] + w * pts[i, d]
                        pull[d] = pull[d] + (pts[i, d] - pts[j, d]) * w
            if mult == k:
                return np.asarray(pts[j]).copy(), it, j
            acc = 0.0
            for d in range(p):
                acc = acc + pull[d] * pull[d]
            r = sqrt(acc)
            if r <= mult:
                return np.asarray(pts[j]).copy(), it, j
            shrink = mult / r
            step = 0.0
            for d in range(p):
                v = (1.0 - shrink) * (num[d] / wsum) + shrink * pts[j, d]
                step = step + (v - x[d]) * (v - x[d])
                x[d] = v
        else:
            for i in range(k):
                w = 1.0 / dist[i]
                wsum = wsum + w
                for d in range(p):
                    num[d] = num[d] + w * pts[i, d]
            step = 0.0
            for d in range(p):
                v = num[d] / wsum
                step = step + (v - x[d]) * (v - x[d])
                x[d] = v
        if sqrt(step) < step_tol:
            return x_arr, it, -1
    return x_arr, max_iter, -1
