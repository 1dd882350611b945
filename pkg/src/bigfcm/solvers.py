"""Fuzzy c-means solvers.

Four entry points share one alternating-optimization skeleton:

* :func:`fcm_naive` — reference implementation that materializes the full
  membership matrix each iteration. Kept for cross-checking; quadratic in
  memory over ``n * c``.
* :func:`fcm_fast` — single-pass accumulation variant, O(c * d) state.
* :func:`wfcm` — the same accumulation update with per-point weights.
* :func:`wfcmpb` — block-progressive weighted clustering: each block is
  clustered seeded with the previous block's centers, and the weighted
  center pool is merged down after every block.

``fcm_fast`` is ``wfcm`` with unit weights; both call the same compiled
kernel, so their results on identical inputs are bit-for-bit equal.
"""

import dataclasses
import math

import numpy as np

from . import numeric
from ._kernels import farthest_point, weighted_pass
from .errors import DegenerateDataError

__all__ = [
    "FcmParams",
    "SolveResult",
    "converged",
    "fcm_fast",
    "fcm_naive",
    "initial_centers",
    "wfcm",
    "wfcmpb",
]


@dataclasses.dataclass(frozen=True)
class FcmParams:
    """Shared clustering parameters.

    Parameters
    ----------
    c : int
        Number of final clusters; at least 1.
    c_intermediate : int, optional
        Cluster count used by per-partition combiners. Defaults to ``c``.
        Must be at least ``c``.
    m : float
        Fuzziness exponent, strictly greater than 1.
    epsilon : float
        Convergence threshold on the maximum squared center shift.
    max_iterations : int
        Hard cap on alternating iterations; at least 1.
    seed : int
        Base RNG seed for every randomized stage.
    """

    c: int
    c_intermediate: int = None
    m: float = 2.0
    epsilon: float = 5.0e-7
    max_iterations: int = 1000
    seed: int = 0

    def __post_init__(self):
        if self.c_intermediate is None:
            object.__setattr__(self, "c_intermediate", self.c)
        if self.c < 1:
            raise ValueError(f"c must be at least 1, got {self.c}")
        if self.c_intermediate < self.c:
            raise ValueError(
                f"c_intermediate ({self.c_intermediate}) must be at least c ({self.c})"
            )
        if not self.m > 1.0:
            raise ValueError(f"fuzziness m must be > 1, got {self.m}")
        if not self.epsilon > 0.0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        if self.max_iterations < 1:
            raise ValueError(
                f"max_iterations must be at least 1, got {self.max_iterations}"
            )


@dataclasses.dataclass(frozen=True)
class SolveResult:
    """Outcome of one solver run.

    ``weights`` holds the per-cluster accumulated membership mass from the
    final center update; ``final_shift`` is the maximum squared center
    movement of the last iteration; ``objective`` is the weighted
    within-cluster objective at the returned centers (``nan`` when the
    caller skipped it).
    """

    centers: np.ndarray
    weights: np.ndarray
    iterations: int
    converged: bool
    final_shift: float
    objective: float


def converged(old_centers, new_centers, epsilon):
    """True when no center moved farther than ``sqrt(epsilon)``.

    The comparison is on squared Euclidean shifts, consistent with the
    squared distances used everywhere else.
    """
    old = np.asarray(old_centers, dtype=np.float64)
    new = np.asarray(new_centers, dtype=np.float64)
    if old.shape != new.shape:
        raise ValueError(
            f"center array shapes differ: {old.shape} vs {new.shape}"
        )
    if not epsilon > 0.0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    shift = float(((new - old) ** 2).sum(axis=1).max())
    return shift <= epsilon


def initial_centers(points, c, rng):
    """Pick ``c`` distinct rows of ``points`` uniformly at random."""
    pts = _as_points(points)
    if c > pts.shape[0]:
        raise ValueError(
            f"cannot draw {c} initial centers from {pts.shape[0]} points"
        )
    idx = rng.choice(pts.shape[0], size=c, replace=False)
    return pts[np.sort(idx)].copy()


def _as_points(points):
    pts = np.ascontiguousarray(points, dtype=np.float64)
    if pts.ndim == 1:
        pts = pts.reshape(-1, 1)
    if pts.ndim != 2 or pts.shape[0] == 0:
        raise ValueError("points must be a non-empty 2-D array")
    if not np.isfinite(pts).all():
        raise ValueError("points contain non-finite values")
    return pts


def _as_init(init, c, dim):
    centers = np.ascontiguousarray(init, dtype=np.float64)
    if centers.ndim == 1:
        centers = centers.reshape(-1, 1)
    if centers.shape != (c, dim):
        raise ValueError(
            f"initial centers have shape {centers.shape}, expected ({c}, {dim})"
        )
    if not np.isfinite(centers).all():
        raise ValueError("initial centers contain non-finite values")
    return centers.copy()


def _reseed(points, centers, empty):
    """Replace each empty cluster's center with the point farthest from
    its nearest center. Deterministic: ties go to the lowest point index."""
    for i in empty:
        centers[i] = points[farthest_point(points, centers)]
    return centers


def _accumulate(points, weights, centers, m, c):
    """Run one pass, re-seeding empty clusters and redoing the pass until
    every cluster has mass (bounded number of attempts)."""
    for _ in range(c + 2):
        v_acc, w_acc, q = weighted_pass(points, weights, centers, m)
        empty = np.flatnonzero(w_acc == 0.0)
        if empty.size == 0:
            return v_acc, w_acc, q
        _reseed(points, centers, empty)
    raise DegenerateDataError(
        f"could not populate {empty.size} empty cluster(s) after re-seeding; "
        "the data may have fewer distinct points than clusters"
    )


def _alternate(points, weights, centers, params, with_objective):
    """Shared alternating-optimization loop over the streaming kernel."""
    it = 0
    did_converge = False
    shift = math.inf
    q_last = math.nan
    w_acc = np.zeros(params.c)
    while it < params.max_iterations:
        v_acc, w_acc, q_last = _accumulate(
            points, weights, centers, params.m, params.c
        )
        new_centers = v_acc / w_acc[:, None]
        shift = float(((new_centers - centers) ** 2).sum(axis=1).max())
        centers = new_centers
        it += 1
        if shift <= params.epsilon:
            did_converge = True
            break
    if with_objective:
        objective = float(weighted_pass(points, weights, centers, params.m)[2])
    else:
        # Objective from the final pass, i.e. measured at the previous
        # centers; cheap but one update stale.
        objective = float(q_last)
    return SolveResult(
        centers=centers,
        weights=w_acc,
        iterations=it,
        converged=did_converge,
        final_shift=shift,
        objective=objective,
    )


def fcm_fast(points, initial, params, with_objective=True):
    """Accumulation-based fuzzy c-means with unit weights.

    Parameters
    ----------
    points : array-like, shape (n, d)
        Finite feature vectors, ``n >= params.c``.
    initial : array-like, shape (c, d)
        Starting centers.
    params : FcmParams
    with_objective : bool
        When true (default) an extra pass evaluates the objective at the
        returned centers; otherwise the last in-loop value is reported.
    """
    pts = _as_points(points)
    if pts.shape[0] < params.c:
        raise ValueError(
            f"need at least {params.c} points, got {pts.shape[0]}"
        )
    centers = _as_init(initial, params.c, pts.shape[1])
    ones = np.ones(pts.shape[0])
    return _alternate(pts, ones, centers, params, with_objective)


def wfcm(points, weights, initial, params, with_objective=True):
    """Weighted fuzzy c-means over the same streaming kernel.

    Every point carries a positive weight that scales its contribution to
    both the center numerators and the cluster mass.
    """
    pts = _as_points(points)
    w = np.ascontiguousarray(weights, dtype=np.float64)
    if w.shape != (pts.shape[0],):
        raise ValueError(
            f"weights have shape {w.shape}, expected ({pts.shape[0]},)"
        )
    if not np.isfinite(w).all() or (w <= 0.0).any():
        raise ValueError("weights must be finite and strictly positive")
    if pts.shape[0] < params.c:
        raise ValueError(
            f"need at least {params.c} points, got {pts.shape[0]}"
        )
    centers = _as_init(initial, params.c, pts.shape[1])
    return _alternate(pts, w, centers, params, with_objective)


def wfcmpb(points, initial, params, block_size, with_objective=True):
    """Block-progressive weighted clustering.

    The data is cut into consecutive blocks of ``block_size`` points (a
    trailing remainder smaller than ``params.c`` is folded into the
    previous block). Block 1 is clustered from ``initial``; every later
    block is seeded with the previous block's centers. After each block
    the accumulated pool of weighted centers is merged down to ``params.c``
    centers with :func:`wfcm`, seeded by the first ``c`` pooled centers,
    so the merged result carries the running weight mass forward.
    """
    pts = _as_points(points)
    if block_size < params.c:
        raise ValueError(
            f"block_size ({block_size}) must be at least c ({params.c})"
        )
    n = pts.shape[0]
    bounds = []
    start = 0
    while start < n:
        stop = min(start + block_size, n)
        if bounds and stop - start < params.c:
            bounds[-1] = (bounds[-1][0], stop)
        else:
            bounds.append((start, stop))
        start = stop
    seed_centers = _as_init(initial, params.c, pts.shape[1])
    pool_pts = None
    pool_w = None
    total_iterations = 0
    merge = None
    for a, b in bounds:
        block = fcm_fast(pts[a:b], seed_centers, params, with_objective=False)
        total_iterations += block.iterations
        seed_centers = block.centers
        if pool_pts is None:
            pool_pts = block.centers
            pool_w = block.weights
        else:
            pool_pts = np.vstack([pool_pts, block.centers])
            pool_w = np.concatenate([pool_w, block.weights])
        merge = wfcm(
            pool_pts,
            pool_w,
            pool_pts[: params.c].copy(),
            params,
            with_objective=False,
        )
        total_iterations += merge.iterations
        pool_pts = merge.centers
        pool_w = merge.weights
    if with_objective:
        objective = float(
            weighted_pass(pts, np.ones(n), merge.centers, params.m)[2]
        )
    else:
        objective = math.nan
    return SolveResult(
        centers=merge.centers,
        weights=merge.weights,
        iterations=total_iterations,
        converged=merge.converged,
        final_shift=merge.final_shift,
        objective=objective,
    )


def fcm_naive(points, initial, params, with_objective=True):
    """Reference fuzzy c-means that stores the full membership matrix.

    Exists to cross-check the accumulation solvers: it follows the
    classic two-step update (memberships for all points, then centers)
    with an ``(n, c)`` membership array, trading memory for clarity.
    Empty-cluster re-seeding and convergence match :func:`fcm_fast`.
    """
    pts = _as_points(points)
    if pts.shape[0] < params.c:
        raise ValueError(
            f"need at least {params.c} points, got {pts.shape[0]}"
        )
    centers = _as_init(initial, params.c, pts.shape[1])
    it = 0
    did_converge = False
    shift = math.inf
    mass = np.zeros(params.c)
    while it < params.max_iterations:
        for _ in range(params.c + 2):
            d2 = numeric.sqdist_matrix(pts, centers)
            memberships = numeric.terms_matrix(d2, params.m) ** (1.0 / params.m)
            terms = memberships ** params.m
            mass = terms.sum(axis=0)
            empty = np.flatnonzero(mass == 0.0)
            if empty.size == 0:
                break
            _reseed(pts, centers, empty)
        else:
            raise DegenerateDataError(
                "could not populate empty cluster(s) after re-seeding; the "
                "data may have fewer distinct points than clusters"
            )
        new_centers = (terms.T @ pts) / mass[:, None]
        shift = float(((new_centers - centers) ** 2).sum(axis=1).max())
        centers = new_centers
        it += 1
        if shift <= params.epsilon:
            did_converge = True
            break
    if with_objective:
        objective = numeric.fcm_objective(
            pts, np.ones(pts.shape[0]), centers, params.m
        )
    else:
        objective = math.nan
    return SolveResult(
        centers=centers,
        weights=mass,
        iterations=it,
        converged=did_converge,
        final_shift=shift,
        objective=objective,
    )
