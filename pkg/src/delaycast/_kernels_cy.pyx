# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled split-search kernels; contract mirrors _kernels_py."""
import numpy as np

cimport numpy as cnp

cnp.import_array()


def best_split_gini(cnp.float64_t[::1] x, cnp.float64_t[::1] y, double min_leaf):
    cdef Py_ssize_t n = x.shape[0]
    if n < 2:
        return np.nan, -np.inf
    order = np.argsort(np.asarray(x), kind="stable")
    cdef cnp.float64_t[::1] xs = np.ascontiguousarray(np.asarray(x)[order])
    cdef cnp.float64_t[::1] ys = np.ascontiguousarray(np.asarray(y)[order])

    cdef double tot1 = 0.0
    cdef Py_ssize_t i
    for i in range(n):
        tot1 += ys[i]
    cdef double p1 = tot1 / n
    cdef double parent = 1.0 - p1 * p1 - (1.0 - p1) * (1.0 - p1)

    cdef double best_score = -np.inf
    cdef double best_thr = np.nan
    cdef double l1 = 0.0
    cdef double nl, nr, r1, pl, pr, gini_l, gini_r, dec
    for i in range(n - 1):
        l1 += ys[i]
        nl = i + 1.0
        nr = n - nl
        if xs[i] == xs[i + 1] or nl < min_leaf or nr < min_leaf:
            continue
        r1 = tot1 - l1
        pl = l1 / nl
        pr = r1 / nr
        gini_l = 1.0 - pl * pl - (1.0 - pl) * (1.0 - pl)
        gini_r = 1.0 - pr * pr - (1.0 - pr) * (1.0 - pr)
        dec = parent - (nl * gini_l + nr * gini_r) / n
        if dec > best_score:
            best_score = dec
            best_thr = 0.5 * (xs[i] + xs[i + 1])
    return best_thr, best_score


def best_split_grad_hess(cnp.float64_t[::1] x, cnp.float64_t[::1] g,
                         cnp.float64_t[::1] h, double lam,
                         double min_child_hessian):
    cdef Py_ssize_t n = x.shape[0]
    if n < 2:
        return np.nan, -np.inf
    order = np.argsort(np.asarray(x), kind="stable")
    cdef cnp.float64_t[::1] xs = np.ascontiguousarray(np.asarray(x)[order])
    cdef cnp.float64_t[::1] gs = np.ascontiguousarray(np.asarray(g)[order])
    cdef cnp.float64_t[::1] hs = np.ascontiguousarray(np.asarray(h)[order])

    cdef double g_tot = 0.0, h_tot = 0.0
    cdef Py_ssize_t i
    for i in range(n):
        g_tot += gs[i]
        h_tot += hs[i]
    cdef double root_score = g_tot * g_tot / (h_tot + lam)

    cdef double best_score = -np.inf
    cdef double best_thr = np.nan
    cdef double gl = 0.0, hl = 0.0
    cdef double gr, hr, gain
    for i in range(n - 1):
        gl += gs[i]
        hl += hs[i]
        if xs[i] == xs[i + 1]:
            continue
        hr = h_tot - hl
        if hl < min_child_hessian or hr < min_child_hessian:
            continue
        gr = g_tot - gl
        gain = 0.5 * (gl * gl / (hl + lam) + gr * gr / (hr + lam) - root_score)
        if gain > best_score:
            best_score = gain
            best_thr = 0.5 * (xs[i] + xs[i + 1])
    return best_thr, best_score
