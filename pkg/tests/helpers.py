"""Shared test utilities: synthetic datasets and center alignment."""

import numpy as np
from scipy.optimize import linear_sum_assignment


def gaussian_mixture(means, sigma, per_cluster, seed, shuffle=True):
    """Sample isotropic Gaussian clusters around `means`.

    `per_cluster` is one count for all clusters or a sequence of counts.
    Returns (points, labels) with labels naming the generating cluster.
    """
    rng = np.random.default_rng(seed)
    means = np.atleast_2d(np.asarray(means, dtype=float))
    if np.isscalar(per_cluster):
        per_cluster = [per_cluster] * means.shape[0]
    chunks = []
    labels = []
    for idx, (mu, count) in enumerate(zip(means, per_cluster)):
        chunks.append(rng.normal(mu, sigma, size=(count, means.shape[1])))
        labels.extend([idx] * count)
    points = np.vstack(chunks)
    labels = np.array(labels)
    if shuffle:
        order = rng.permutation(points.shape[0])
        points = points[order]
        labels = labels[order]
    return points, labels


def align_centers(centers, reference):
    """Reorder `centers` to minimize total distance to `reference` rows."""
    centers = np.atleast_2d(np.asarray(centers, dtype=float))
    reference = np.atleast_2d(np.asarray(reference, dtype=float))
    diff = centers[:, None, :] - reference[None, :, :]
    cost = np.sqrt(np.einsum("abk,abk->ab", diff, diff))
    rows, cols = linear_sum_assignment(cost)
    order = np.empty(len(cols), dtype=int)
    order[cols] = rows
    return centers[order]


def max_center_error(centers, reference):
    """Largest per-coordinate deviation after best-match alignment."""
    aligned = align_centers(centers, reference)
    return float(np.abs(aligned - np.atleast_2d(reference)).max())


class ScriptedClock:
    """Clock returning pre-programmed readings in sequence."""

    def __init__(self, values):
        self.values = list(values)

    def __call__(self):
        return self.values.pop(0)


class TickingClock:
    """Monotonic fake clock: every reading advances by a fixed step, so
    any two timed intervals bracketing one call each come out equal."""

    def __init__(self, step=1.0):
        self.now = 0.0
        self.step = step

    def __call__(self):
        self.now += self.step
        return self.now
