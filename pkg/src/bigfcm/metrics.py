"""Cluster evaluation: hardened assignments, confusion accuracy,
silhouette width, relative speedup."""

import dataclasses

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import UndefinedMetricError

__all__ = [
    "EvalReport",
    "assign",
    "confusion_accuracy",
    "relative_speedup",
    "silhouette_width",
]

# Above this many clusters the exact assignment search is replaced by
# greedy row maxima (documented exactness caveat).
_EXACT_MAPPING_LIMIT = 10


@dataclasses.dataclass
class EvalReport:
    """Evaluation summary for one clustering result."""

    accuracy: float = None
    mapping: dict = None
    silhouette: float = None
    silhouette_sample_size: int = None
    runtimes: dict = dataclasses.field(default_factory=dict)
    speedup: float = None


def assign(points, centers, m=2.0):
    """Harden fuzzy output: nearest center per point, ties to the lowest
    index.

    For this membership family the argmax membership is always the
    nearest center, so ``m`` does not affect the result; it is accepted
    for interface symmetry with the solvers.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    ctr = np.atleast_2d(np.asarray(centers, dtype=np.float64))
    if ctr.shape[0] < 1:
        raise ValueError("centers must be nonempty")
    if pts.shape[1] != ctr.shape[1]:
        raise ValueError(
            f"dimension mismatch: points have {pts.shape[1]}, centers have {ctr.shape[1]}"
        )
    out = np.empty(pts.shape[0], dtype=np.int64)
    chunk = 8192
    for start in range(0, pts.shape[0], chunk):
        block = pts[start : start + chunk]
        diff = block[:, None, :] - ctr[None, :, :]
        d2 = np.einsum("nck,nck->nc", diff, diff)
        out[start : start + chunk] = d2.argmin(axis=1)
    return out


def confusion_accuracy(assignments, labels):
    """Best-mapping accuracy from the cluster-vs-label contingency table.

    Returns ``(fraction, mapping)`` where ``mapping`` sends each cluster
    index to the label it was matched with. With at most as many clusters
    as labels the mapping is an injective optimal assignment; with more
    clusters than labels each cluster independently takes its majority
    label (repetition allowed). Beyond 10 clusters the search degrades to
    greedy row maxima, which may be suboptimal in the injective regime.
    """
    a = np.asarray(assignments)
    labels = list(labels)
    if a.shape[0] != len(labels):
        raise ValueError(
            f"length mismatch: {a.shape[0]} assignments, {len(labels)} labels"
        )
    if a.shape[0] == 0:
        raise ValueError("cannot evaluate an empty assignment list")
    clusters = sorted(set(int(v) for v in a))
    names = []
    seen = set()
    for lab in labels:
        if lab not in seen:
            seen.add(lab)
            names.append(lab)
    cluster_pos = {cv: i for i, cv in enumerate(clusters)}
    name_pos = {nm: j for j, nm in enumerate(names)}
    table = np.zeros((len(clusters), len(names)), dtype=np.int64)
    for cv, lab in zip(a, labels):
        table[cluster_pos[int(cv)], name_pos[lab]] += 1

    if len(clusters) <= min(_EXACT_MAPPING_LIMIT, len(names)):
        rows, cols = linear_sum_assignment(table, maximize=True)
        pairs = dict(zip(rows, cols))
    else:
        pairs = {i: int(table[i].argmax()) for i in range(len(clusters))}
    matched = sum(int(table[i, j]) for i, j in pairs.items())
    mapping = {clusters[i]: names[j] for i, j in pairs.items()}
    return matched / a.shape[0], mapping


def silhouette_width(points, assignments, sample_cap=4000, seed=0):
    """Mean silhouette width s = (b - a) / max(a, b).

    ``a`` is the mean distance to the point's own cluster, ``b`` the
    smallest mean distance to any other cluster; singleton-cluster points
    score 0. Datasets larger than ``sample_cap`` are scored on a seeded
    uniform sample, with distances computed within that sample.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    a = np.asarray(assignments)
    if pts.shape[0] != a.shape[0]:
        raise ValueError(
            f"length mismatch: {pts.shape[0]} points, {a.shape[0]} assignments"
        )
    if pts.shape[0] < 2:
        raise ValueError("silhouette needs at least 2 points")
    if sample_cap < 2:
        raise ValueError(f"sample_cap must be at least 2, got {sample_cap}")
    if np.unique(a).size < 2:
        raise UndefinedMetricError(
            "silhouette undefined for a single cluster"
        )
    if pts.shape[0] > sample_cap:
        rng = np.random.default_rng(seed)
        idx = np.sort(rng.choice(pts.shape[0], size=sample_cap, replace=False))
        pts = pts[idx]
        a = a[idx]
        if np.unique(a).size < 2:
            raise UndefinedMetricError(
                "silhouette undefined: sampling left a single cluster"
            )
    n = pts.shape[0]
    clusters, codes = np.unique(a, return_inverse=True)
    counts = np.bincount(codes, minlength=clusters.size)
    onehot = np.zeros((n, clusters.size))
    onehot[np.arange(n), codes] = 1.0
    total = 0.0
    chunk = 2048
    sq = np.einsum("nk,nk->n", pts, pts)
    for start in range(0, n, chunk):
        block = pts[start : start + chunk]
        d2 = sq[start : start + chunk, None] + sq[None, :] - 2.0 * (block @ pts.T)
        np.maximum(d2, 0.0, out=d2)
        dist = np.sqrt(d2)
        cluster_sums = dist @ onehot  # (b, n_clusters)
        for r in range(block.shape[0]):
            own = codes[start + r]
            if counts[own] == 1:
                continue  # singleton convention: s = 0
            a_val = cluster_sums[r, own] / (counts[own] - 1)
            b_val = np.inf
            for c in range(clusters.size):
                if c != own:
                    mean_c = cluster_sums[r, c] / counts[c]
                    if mean_c < b_val:
                        b_val = mean_c
            denom = max(a_val, b_val)
            if denom > 0.0:
                total += (b_val - a_val) / denom
    return total / n


def relative_speedup(t_baseline, t_candidate):
    """Ratio of baseline wall time to candidate wall time."""
    if not t_baseline > 0.0 or not t_candidate > 0.0:
        raise ValueError(
            f"wall times must be positive, got {t_baseline} and {t_candidate}"
        )
    return t_baseline / t_candidate
