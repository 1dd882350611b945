"""Sample-size formulas and single-pass reservoir sampling.

Two classical prescriptions size the seed sample:

* Parker/Hall style: ``ceil(v_alpha * c**2 / r**2)`` where ``v_alpha`` is
  a tabulated critical value, ``c`` the cluster count and ``r`` the
  tolerated relative difference.
* Thompson style: ``ceil(v_alpha / d**2)`` for an absolute proportion
  error ``d``.

The reservoir sampler is the skip-based variant (Li's "Algorithm L"):
it draws a geometric-like gap, jumps over that many records and replaces
a random slot, so the expected number of RNG draws is O(k log(n / k))
rather than one per record. Sequences with random access skip by index;
plain iterators are consumed and discarded in the gaps.
"""

import dataclasses
import itertools
import math

import numpy as np

__all__ = [
    "SampleSpec",
    "V_ALPHA_TABLE",
    "default_sample_size",
    "parker_hall_size",
    "reservoir_sample",
    "thompson_size",
]

# Critical values v(alpha) for the sample-size formulas. Only the 5%
# level is tabulated; other levels raise so a silent wrong constant can
# never slip in. The CLI can extend the table from its config file.
V_ALPHA_TABLE = {0.05: 1.27359}


@dataclasses.dataclass(frozen=True)
class SampleSpec:
    """A resolved sample-size request.

    Bundles the inputs of the cluster-count formula with the integer
    size they resolve to, for reporting.
    """

    alpha: float
    v_alpha: float
    clusters: int
    relative_difference: float
    resolved_size: int

    @classmethod
    def resolve(cls, alpha, clusters, relative_difference, table=None):
        """Look up v(alpha) and apply the cluster-count formula."""
        if table is None:
            table = V_ALPHA_TABLE
        if alpha not in table:
            supported = ", ".join(str(a) for a in sorted(table))
            raise ValueError(
                f"no tabulated critical value for alpha={alpha}; "
                f"supported: {supported}"
            )
        v_alpha = table[alpha]
        size = parker_hall_size(v_alpha, clusters, relative_difference)
        return cls(alpha=alpha, v_alpha=v_alpha, clusters=clusters,
                   relative_difference=relative_difference,
                   resolved_size=size)


def parker_hall_size(v_alpha, clusters, relative_difference):
    """Sample size ``ceil(v_alpha * clusters**2 / relative_difference**2)``.

    Parameters
    ----------
    v_alpha : float
        Positive critical value, e.g. ``V_ALPHA_TABLE[0.05]``.
    clusters : int
        Number of clusters, at least 1.
    relative_difference : float
        Tolerated relative difference, in (0, 1].
    """
    if not v_alpha > 0.0:
        raise ValueError(f"v_alpha must be positive, got {v_alpha}")
    if clusters < 1:
        raise ValueError(f"clusters must be at least 1, got {clusters}")
    if not 0.0 < relative_difference <= 1.0:
        raise ValueError(
            f"relative_difference must be in (0, 1], got {relative_difference}"
        )
    return math.ceil(v_alpha * clusters**2 / relative_difference**2)


def thompson_size(alpha, absolute_difference, table=None):
    """Sample size ``ceil(v_alpha / absolute_difference**2)``.

    ``alpha`` must be a tabulated confidence level (see
    :data:`V_ALPHA_TABLE`); unknown levels raise with the supported set in
    the message.
    """
    if table is None:
        table = V_ALPHA_TABLE
    if alpha not in table:
        supported = ", ".join(str(a) for a in sorted(table))
        raise ValueError(
            f"no tabulated critical value for alpha={alpha}; supported: {supported}"
        )
    if not 0.0 < absolute_difference <= 1.0:
        raise ValueError(
            f"absolute_difference must be in (0, 1], got {absolute_difference}"
        )
    return math.ceil(table[alpha] / absolute_difference**2)


def default_sample_size(clusters, population):
    """Seed-sample size: the 5% Parker/Hall size at 10% relative
    difference, clamped to ``[clusters * 10, population]``."""
    if population < 1:
        raise ValueError(f"population must be at least 1, got {population}")
    lam = parker_hall_size(V_ALPHA_TABLE[0.05], clusters, 0.10)
    return min(population, max(clusters * 10, lam))


def _rng_from(seed):
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def _uniform(rng):
    # In (0, 1]: keeps the logs finite.
    return 1.0 - rng.random()


def _reservoir_indices(n, k, rng):
    """Indices selected by the skip-based reservoir over range(n)."""
    chosen = np.arange(k, dtype=np.int64)
    w = math.exp(math.log(_uniform(rng)) / k)
    i = k - 1
    while True:
        i += math.floor(math.log(_uniform(rng)) / math.log1p(-w)) + 1
        if i >= n:
            return chosen
        chosen[rng.integers(0, k)] = i
        w *= math.exp(math.log(_uniform(rng)) / k)


def reservoir_sample(records, k, seed):
    """Uniform sample of ``k`` records in one pass.

    Parameters
    ----------
    records : sequence or iterable
        Record stream. Sequences (anything with ``len``) use the
        random-access fast path; other iterables are consumed once.
    k : int
        Requested sample size, at least 1. When the stream holds fewer
        than ``k`` records, all of them are returned.
    seed : int or numpy.random.Generator
        Seed (or generator) driving the skip draws.

    Returns
    -------
    ndarray rows for array input, otherwise a list. The selection is
    identical for both paths given the same seed.
    """
    if k < 1:
        raise ValueError(f"sample size must be at least 1, got {k}")
    rng = _rng_from(seed)

    if hasattr(records, "__len__") and hasattr(records, "__getitem__"):
        n = len(records)
        if n == 0:
            raise ValueError("cannot sample from an empty record stream")
        if n <= k:
            idx = np.arange(n)
        else:
            idx = _reservoir_indices(n, k, rng)
        if isinstance(records, np.ndarray):
            return records[idx].copy()
        return [records[int(i)] for i in idx]

    stream = iter(records)
    reservoir = list(itertools.islice(stream, k))
    if not reservoir:
        raise ValueError("cannot sample from an empty record stream")
    if len(reservoir) < k:
        return reservoir
    exhausted = object()
    w = math.exp(math.log(_uniform(rng)) / k)
    while True:
        gap = math.floor(math.log(_uniform(rng)) / math.log1p(-w)) + 1
        record = next(itertools.islice(stream, gap - 1, gap), exhausted)
        if record is exhausted:
            return reservoir
        reservoir[rng.integers(0, k)] = record
        w *= math.exp(math.log(_uniform(rng)) / k)
