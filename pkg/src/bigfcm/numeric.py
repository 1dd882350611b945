"""Pure numeric kernels: distances, fuzzy membership terms, objective.

Every solver in this package shares the same membership arithmetic. For a
point x and centers v_1..v_C with fuzzifier m > 1, the membership of x in
cluster i is

    u_i = 1 / sum_j (d2_i / d2_j)^(1/(m-1)),        d2_i = ||x - v_i||^2

and the quantity the accumulation solvers actually consume is the
*membership term* u_i^m (never the normalized u_i itself). When x coincides
with one or more centers the full membership is split equally among the
coincident centers; coincidence means d2 exactly zero, not a tolerance.

All arithmetic is float64.
"""

import numpy as np


def squared_euclidean(a, b):
    """Squared Euclidean distance between two equal-dimension vectors."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 1 or b.ndim != 1 or a.shape[0] != b.shape[0]:
        raise ValueError(
            f"dimension mismatch: {a.shape[0] if a.ndim == 1 else a.shape} vs "
            f"{b.shape[0] if b.ndim == 1 else b.shape}"
        )
    d = a - b
    return float(np.dot(d, d))


def _check_fuzzifier(m):
    if not m > 1.0:
        raise ValueError(f"fuzzifier m must be > 1 (got {m}); exponent 1/(m-1) undefined")


def terms_from_sqdist(d2, m):
    """Membership terms u^m for one point given its squared distances to all centers.

    Row-stable formulation: distances are scaled by the row minimum so that
    neither the inverse-power sum nor the final power can overflow for the
    nearest cluster. Coincident centers (d2 == 0) split the membership
    equally: term = (1/k)^m for the k coincident entries, 0 elsewhere.
    """
    d2 = np.asarray(d2, dtype=np.float64)
    zero = d2 == 0.0
    if zero.any():
        terms = np.zeros_like(d2)
        terms[zero] = (1.0 / zero.sum()) ** m
        return terms
    p = 1.0 / (m - 1.0)
    dmin = d2.min()
    inv_sum = ((dmin / d2) ** p).sum()
    s = (d2 / dmin) ** p * inv_sum
    return s ** (-m)


def terms_matrix(d2, m):
    """Row-wise `terms_from_sqdist` for a (n, c) squared-distance matrix."""
    d2 = np.asarray(d2, dtype=np.float64)
    p = 1.0 / (m - 1.0)
    dmin = d2.min(axis=1, keepdims=True)
    zero_rows = dmin[:, 0] == 0.0
    # avoid 0/0 on coincident rows; they are overwritten below
    safe_min = np.where(dmin == 0.0, 1.0, dmin)
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        inv_sum = ((safe_min / d2) ** p).sum(axis=1, keepdims=True)
        s = (d2 / safe_min) ** p * inv_sum
        terms = s ** (-m)
    if zero_rows.any():
        hits = d2[zero_rows] == 0.0
        k = hits.sum(axis=1, keepdims=True)
        terms[zero_rows] = np.where(hits, (1.0 / k) ** m, 0.0)
    return terms


def sqdist_matrix(points, centers):
    """(n, c) matrix of squared Euclidean distances."""
    # ||x||^2 - 2 x.v + ||v||^2 is faster but loses precision near zero;
    # the explicit difference keeps coincidence detection exact.
    diff = points[:, None, :] - centers[None, :, :]
    return np.einsum("nck,nck->nc", diff, diff)


def membership_terms(x, centers, m):
    """Membership terms u^m of point `x` for every center.

    Parameters
    ----------
    x : array-like, shape (d,)
    centers : array-like, shape (c, d)
    m : float
        Fuzzifier, must be > 1.

    Returns
    -------
    terms : ndarray, shape (c,)
        Each in [0, 1]; the recovered memberships terms**(1/m) sum to 1.
    """
    _check_fuzzifier(m)
    x = np.asarray(x, dtype=np.float64)
    centers = np.atleast_2d(np.asarray(centers, dtype=np.float64))
    if centers.shape[0] < 1:
        raise ValueError("centers must be nonempty")
    if x.ndim != 1 or centers.shape[1] != x.shape[0]:
        raise ValueError(
            f"dimension mismatch: point has {x.shape[0]}, centers have {centers.shape[1]}"
        )
    d2 = np.einsum("cj,cj->c", centers - x, centers - x)
    return terms_from_sqdist(d2, m)


def fcm_objective(points, weights, centers, m, chunk=8192):
    """Weighted fuzzy objective Q = sum_i sum_k w_k u_ik^m ||x_k - v_i||^2.

    `weights` of all ones gives the unweighted objective. Memberships are
    recomputed from the centers, so this evaluates the objective at its
    membership optimum for the given centers.
    """
    _check_fuzzifier(m)
    points = np.atleast_2d(np.asarray(points, dtype=np.float64))
    centers = np.atleast_2d(np.asarray(centers, dtype=np.float64))
    weights = np.asarray(weights, dtype=np.float64)
    if weights.shape != (points.shape[0],):
        raise ValueError(
            f"need one weight per point: {weights.shape[0]} weights, {points.shape[0]} points"
        )
    if np.any(weights <= 0.0):
        raise ValueError("weights must all be > 0")
    if points.shape[1] != centers.shape[1]:
        raise ValueError(
            f"dimension mismatch: points have {points.shape[1]}, centers have {centers.shape[1]}"
        )
    q = 0.0
    for start in range(0, points.shape[0], chunk):
        block = points[start : start + chunk]
        d2 = sqdist_matrix(block, centers)
        t = terms_matrix(d2, m)
        q += float(weights[start : start + chunk] @ (t * d2).sum(axis=1))
    return q
