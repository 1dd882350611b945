"""Streaming accumulation kernels (numba).

The accumulation solvers never materialize a membership matrix: each pass
walks the points once, holding only the c x d center accumulator, the c
mass accumulator and two c-sized scratch buffers. Kernels release the GIL
so partition workers can overlap on multicore hosts.
"""

import numba
import numpy as np


@numba.njit(cache=True, nogil=True)
def weighted_pass(points, weights, centers, m):
    """One accumulation pass over `points` against fixed `centers`.

    Returns (v_acc, w_acc, q):
      v_acc[i] = sum_k term_ik * w_k * x_k
      w_acc[i] = sum_k term_ik * w_k
      q        = sum_k w_k * sum_i term_ik * d2_ik   (objective at `centers`)

    term_ik is the membership term u_ik^m; coincident centers (d2 == 0)
    split the membership equally.
    """
    n, d = points.shape
    c = centers.shape[0]
    p = 1.0 / (m - 1.0)
    v_acc = np.zeros((c, d))
    w_acc = np.zeros(c)
    d2 = np.empty(c)
    terms = np.empty(c)
    q = 0.0
    for k in range(n):
        dmin = np.inf
        for i in range(c):
            s = 0.0
            for j in range(d):
                diff = points[k, j] - centers[i, j]
                s += diff * diff
            d2[i] = s
            if s < dmin:
                dmin = s
        if dmin == 0.0:
            hits = 0
            for i in range(c):
                if d2[i] == 0.0:
                    hits += 1
            t0 = (1.0 / hits) ** m
            for i in range(c):
                terms[i] = t0 if d2[i] == 0.0 else 0.0
        elif p == 1.0:
            inv_sum = 0.0
            for i in range(c):
                inv_sum += dmin / d2[i]
            for i in range(c):
                s = (d2[i] / dmin) * inv_sum
                terms[i] = s ** (-m)
        else:
            inv_sum = 0.0
            for i in range(c):
                inv_sum += (dmin / d2[i]) ** p
            for i in range(c):
                s = (d2[i] / dmin) ** p * inv_sum
                terms[i] = s ** (-m)
        wk = weights[k]
        for i in range(c):
            t = terms[i] * wk
            if t != 0.0:
                for j in range(d):
                    v_acc[i, j] += t * points[k, j]
                w_acc[i] += t
                q += t * d2[i]
    return v_acc, w_acc, q


@numba.njit(cache=True, nogil=True)
def farthest_point(points, centers):
    """Index of the point with the largest distance to its nearest center.

    Ties resolve to the lowest point index.
    """
    n, d = points.shape
    c = centers.shape[0]
    best = -1.0
    best_k = 0
    for k in range(n):
        dmin = np.inf
        for i in range(c):
            s = 0.0
            for j in range(d):
                diff = points[k, j] - centers[i, j]
                s += diff * diff
            if s < dmin:
                dmin = s
        if dmin > best:
            best = dmin
            best_k = k
    return best_k
