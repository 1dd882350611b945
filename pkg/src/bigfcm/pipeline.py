"""Three-stage clustering pipeline: driver, parallel combiners, reducer.

The driver clusters a reservoir sample twice — once with the
block-progressive solver, once with plain accumulation FCM — times both,
and publishes the faster solver's centers as seeds together with a flag
selecting that solver for the combiner stage. Combiners cluster disjoint
partitions concurrently down to ``c_intermediate`` weighted centers each.
The reducer pools every combiner's weighted centers and merges them to
the final ``c`` centers with weighted FCM; when the pool is large, an
intermediate layer of reducers shrinks groups first.

Determinism: all randomness derives from ``params.seed`` plus a stage
tag, and in deterministic mode (default) combiner outputs are pooled in
partition-index order, so a fixed seed and partition plan reproduce the
model bit-for-bit. Free-order mode pools in completion order for
throughput; center values then depend on scheduling.
"""

import concurrent.futures
import dataclasses
import logging
import time
import zlib

import numpy as np

from . import sampling
from .errors import DegenerateDataError, StageError
from .ingest import PartitionPlan, plan_partitions
from .numeric import fcm_objective
from .solvers import FcmParams, fcm_fast, initial_centers, wfcm, wfcmpb
from .solvers import _as_points  # shared input validation

__all__ = [
    "ClusterModel",
    "CombinerOutput",
    "DriverDecision",
    "PipelineOptions",
    "SeedStore",
    "StageReport",
    "derive_rng",
    "run_bigfcm",
    "run_combiner",
    "run_driver",
    "run_reducer",
]

log = logging.getLogger(__name__)


def derive_rng(seed, tag):
    """Deterministic per-stage generator: base seed plus a stage tag."""
    return np.random.default_rng([seed, zlib.crc32(tag.encode("utf-8"))])


class SeedStore:
    """Publish-once, read-only store for the driver's seed centers.

    Stands in for a shared distributed cache: the driver publishes one
    immutable center set; workers may only read it.
    """

    def __init__(self):
        self._centers = None

    @property
    def published(self):
        return self._centers is not None

    def publish(self, centers):
        if self._centers is not None:
            raise RuntimeError("seed centers already published")
        arr = np.array(centers, dtype=np.float64, copy=True)
        arr.setflags(write=False)
        self._centers = arr

    def get(self):
        if self._centers is None:
            raise LookupError("no seed centers have been published")
        return self._centers


@dataclasses.dataclass(frozen=True)
class DriverDecision:
    """Driver verdict: which solver combiners run, and the seed centers.

    ``flag`` is 1 exactly when the block-progressive solver measured
    slower than plain FCM on the sample (ties give 0); ``seed_centers``
    come from whichever solver won.
    """

    flag: int
    seed_centers: np.ndarray
    t_wfcmpb: float
    t_fcm: float
    sample_size: int
    wfcmpb_iterations: int = 0
    fcm_iterations: int = 0


@dataclasses.dataclass(frozen=True)
class CombinerOutput:
    """Weighted centers from one partition.

    ``passthrough`` marks degenerate partitions (fewer points than
    ``c_intermediate``) whose raw points were emitted with unit weights.
    """

    source_partition: int
    centers: np.ndarray
    weights: np.ndarray
    iterations: int = 0
    passthrough: bool = False


@dataclasses.dataclass
class StageReport:
    """Per-stage accounting for one pipeline run. Times in milliseconds."""

    flag: int = None
    partition_count: int = 0
    parallelism: int = 1
    sample_size: int = 0
    sample_ms: float = 0.0
    driver_ms: float = 0.0
    combine_ms: float = 0.0
    reduce_ms: float = 0.0
    total_ms: float = 0.0
    driver_wfcmpb_iterations: int = 0
    driver_fcm_iterations: int = 0
    combiner_iterations: tuple = ()
    intermediate_reducer_iterations: tuple = ()
    reducer_iterations: int = 0
    hierarchical_groups: int = 1


@dataclasses.dataclass
class ClusterModel:
    """Final clustering: c centers with accumulated weights, stage
    accounting, and the objective evaluated on the validation sample."""

    final_centers: np.ndarray
    final_weights: np.ndarray
    stage_report: StageReport
    objective: float


@dataclasses.dataclass
class PipelineOptions:
    """Run-level knobs for :func:`run_bigfcm`.

    ``driver_epsilon`` defaults to 100x tighter than the reducer epsilon.
    ``sample_size`` overrides the formula-derived reservoir size.
    ``seed_with_driver=False`` gives every combiner its own random
    initial centers instead of the driver's (the driver still runs to
    set the flag). ``clock`` must be a monotonic time source; it is
    called in a fixed before/after pattern per timed stage so tests can
    inject a fake. ``force_flag`` overrides the measured flag (the
    driver still runs and publishes seeds) for pinning a branch when the
    two sample timings are too close to be reproducible.
    ``hierarchical_factor`` sets the pooled-center threshold (factor
    times c_intermediate) beyond which intermediate reducers run.
    """

    driver_epsilon: float = None
    block_size: int = None
    sample_size: int = None
    deterministic: bool = True
    seed_with_driver: bool = True
    clock: callable = None
    seed_store: SeedStore = None
    force_flag: int = None
    hierarchical_factor: int = 10


def _default_block_size(clusters, n):
    return min(n, max(2 * clusters, sampling.default_sample_size(clusters, n)))


def run_driver(sample, params, driver_epsilon, clock=time.perf_counter,
               block_size=None, store=None):
    """Time both solvers on the sample and pick the combiner algorithm.

    The clock is read exactly four times: around the block-progressive
    run (T_f), then around the plain FCM run (T_s). ``flag = 1`` iff
    ``T_f - T_s > 0``; seed centers are the winner's. Both solvers start
    from the same random initial centers (drawn from ``params.seed``)
    and run at ``driver_epsilon``. When ``store`` is given the seed
    centers are published to it.
    """
    pts = _as_points(sample)
    c_int = params.c_intermediate
    if pts.shape[0] < c_int:
        raise ValueError(
            f"driver sample has {pts.shape[0]} points, needs at least "
            f"c_intermediate = {c_int}"
        )
    if not driver_epsilon > 0.0:
        raise ValueError(f"driver_epsilon must be positive, got {driver_epsilon}")
    dparams = dataclasses.replace(
        params, c=c_int, c_intermediate=c_int, epsilon=driver_epsilon
    )
    init = initial_centers(pts, c_int, derive_rng(params.seed, "driver.init"))
    if block_size is None:
        # Several blocks so the timing exercises the progressive path.
        block_size = max(2 * c_int, -(-pts.shape[0] // 4))
    block_size = min(block_size, pts.shape[0])

    # One untimed pass warms the compiled kernels and the sample's cache
    # lines so neither timed run pays those costs.
    fcm_fast(pts, init, dataclasses.replace(dparams, max_iterations=1),
             with_objective=False)

    t0 = clock()
    slow = wfcmpb(pts, init, dparams, block_size, with_objective=False)
    t1 = clock()
    t2 = clock()
    fast = fcm_fast(pts, init, dparams, with_objective=False)
    t3 = clock()
    t_f = t1 - t0
    t_s = t3 - t2
    flag = 1 if (t_f - t_s) > 0.0 else 0
    winner = fast if flag == 1 else slow
    seed_centers = np.array(winner.centers, dtype=np.float64, copy=True)
    seed_centers.setflags(write=False)
    if store is not None:
        store.publish(seed_centers)
    return DriverDecision(
        flag=flag,
        seed_centers=seed_centers,
        t_wfcmpb=t_f,
        t_fcm=t_s,
        sample_size=pts.shape[0],
        wfcmpb_iterations=slow.iterations,
        fcm_iterations=fast.iterations,
    )


def run_combiner(partition, decision, params, partition_index=0,
                 block_size=None, initial=None):
    """Cluster one partition down to ``c_intermediate`` weighted centers.

    The solver is chosen by ``decision.flag`` (1 = plain FCM, 0 =
    block-progressive) and seeded with ``decision.seed_centers`` unless
    ``initial`` overrides them. Partitions smaller than
    ``c_intermediate`` skip clustering and emit their raw points with
    unit weights.
    """
    pts = _as_points(partition)
    seeds = np.asarray(decision.seed_centers, dtype=np.float64)
    if seeds.ndim != 2 or seeds.shape[1] != pts.shape[1]:
        raise ValueError(
            f"dimension mismatch: partition has d={pts.shape[1]}, "
            f"seed centers have d={seeds.shape[1] if seeds.ndim == 2 else '?'}"
        )
    c_int = params.c_intermediate
    if pts.shape[0] < c_int:
        return CombinerOutput(
            source_partition=partition_index,
            centers=pts.copy(),
            weights=np.ones(pts.shape[0]),
            iterations=0,
            passthrough=True,
        )
    cparams = dataclasses.replace(params, c=c_int, c_intermediate=c_int)
    init = np.array(seeds if initial is None else initial,
                    dtype=np.float64, copy=True)
    if decision.flag == 1:
        result = fcm_fast(pts, init, cparams, with_objective=False)
    else:
        if block_size is None:
            block_size = _default_block_size(c_int, pts.shape[0])
        result = wfcmpb(pts, init, cparams, block_size, with_objective=False)
    return CombinerOutput(
        source_partition=partition_index,
        centers=result.centers,
        weights=result.weights,
        iterations=result.iterations,
    )


def _pool_outputs(outputs):
    """Stack combiner outputs (in the given order), dropping zero-weight
    centers."""
    centers = np.vstack([np.atleast_2d(o.centers) for o in outputs])
    weights = np.concatenate([np.asarray(o.weights, dtype=np.float64)
                              for o in outputs])
    keep = weights > 0.0
    return centers[keep], weights[keep]


def _reduce_pool(pool_centers, pool_weights, target_c, params):
    """Merge a weighted center pool down to ``target_c`` centers."""
    if pool_centers.shape[0] < target_c:
        raise DegenerateDataError(
            f"only {pool_centers.shape[0]} pooled centers with nonzero "
            f"weight, need at least {target_c}"
        )
    rparams = dataclasses.replace(params, c=target_c, c_intermediate=target_c)
    init = pool_centers[:target_c].copy()
    return wfcm(pool_centers, pool_weights, init, rparams, with_objective=True)


def run_reducer(outputs, params):
    """Merge all combiner outputs into the final ``c``-center model.

    Centers are pooled in the order the outputs are given (partition
    index order in deterministic mode), zero-weight entries dropped, and
    weighted FCM runs seeded with the first ``c`` pooled centers. The
    reported objective is the weighted objective over the pooled centers.
    """
    if not outputs:
        raise ValueError("no combiner outputs to reduce")
    t0 = time.perf_counter()
    pool_centers, pool_weights = _pool_outputs(outputs)
    merged = _reduce_pool(pool_centers, pool_weights, params.c, params)
    reduce_ms = (time.perf_counter() - t0) * 1e3
    report = StageReport(
        partition_count=len(outputs),
        combiner_iterations=tuple(o.iterations for o in outputs),
        reducer_iterations=merged.iterations,
        reduce_ms=reduce_ms,
        total_ms=reduce_ms,
    )
    return ClusterModel(
        final_centers=merged.centers,
        final_weights=merged.weights,
        stage_report=report,
        objective=merged.objective,
    )


def _combine_stage(points, plan, decision, params, parallelism, options):
    """Run all combiners, up to ``parallelism`` at a time."""
    seed = params.seed

    def one(index):
        start, stop = plan.boundaries[index]
        initial = None
        if not options.seed_with_driver:
            part = points[start:stop]
            if part.shape[0] >= params.c_intermediate:
                initial = initial_centers(
                    part, params.c_intermediate,
                    derive_rng(seed, f"combiner.{index}.init"),
                )
        try:
            return run_combiner(
                points[start:stop], decision, params,
                partition_index=index, block_size=options.block_size,
                initial=initial,
            )
        except Exception as exc:
            raise StageError("combine", str(exc), partition=index) from exc

    indices = range(plan.partition_count)
    if parallelism == 1:
        return [one(i) for i in indices]
    outputs = []
    with concurrent.futures.ThreadPoolExecutor(max_workers=parallelism) as pool:
        futures = {pool.submit(one, i): i for i in indices}
        if options.deterministic:
            ordered = sorted(futures.items(), key=lambda kv: kv[1])
            for future, _ in ordered:
                outputs.append(future.result())
        else:
            for future in concurrent.futures.as_completed(futures):
                outputs.append(future.result())
    return outputs


def run_bigfcm(dataset, params, parallelism=1, partition_plan=None,
               options=None):
    """Full pipeline: sample, drive, combine in parallel, reduce.

    Parameters
    ----------
    dataset : array-like or iterable of feature vectors
        Materialized into one float64 matrix.
    params : FcmParams
    parallelism : int
        Maximum concurrent combiner workers.
    partition_plan : PartitionPlan, optional
        Defaults to ``parallelism`` balanced contiguous partitions.
    options : PipelineOptions, optional

    Returns a :class:`ClusterModel`; the objective is evaluated on the
    driver's reservoir sample at the final centers. Stage failures raise
    :class:`StageError` tagged with the stage name (and partition index
    for combiner failures).
    """
    if parallelism < 1:
        raise ValueError(f"parallelism must be >= 1, got {parallelism}")
    options = options or PipelineOptions()
    clock = options.clock or time.perf_counter
    t_begin = clock()

    if isinstance(dataset, np.ndarray):
        points = _as_points(dataset)
    else:
        points = _as_points(np.array(list(dataset), dtype=np.float64))
    n = points.shape[0]
    c_int = params.c_intermediate

    if partition_plan is None:
        partition_plan = plan_partitions(n, min(parallelism, n))
    elif not isinstance(partition_plan, PartitionPlan):
        raise TypeError("partition_plan must be a PartitionPlan")

    # --- sample stage ---
    t0 = clock()
    k = options.sample_size or sampling.default_sample_size(params.c, n)
    k = min(n, max(k, c_int))
    sample = sampling.reservoir_sample(points, k, derive_rng(params.seed, "sample"))
    sample_ms = (clock() - t0) * 1e3
    log.info("stage=sample records=%d sample_size=%d wall_ms=%.3f",
             n, sample.shape[0], sample_ms)

    # --- driver stage ---
    t0 = clock()
    store = options.seed_store
    if sample.shape[0] >= c_int:
        driver_epsilon = options.driver_epsilon
        if driver_epsilon is None:
            driver_epsilon = params.epsilon / 100.0
        decision = run_driver(
            sample, params, driver_epsilon, clock=clock,
            block_size=options.block_size, store=store,
        )
    else:
        # Fewer points than c_intermediate: every partition will pass
        # through, so publish the sample itself as a stand-in.
        decision = DriverDecision(
            flag=1, seed_centers=sample, t_wfcmpb=0.0, t_fcm=0.0,
            sample_size=sample.shape[0],
        )
        if store is not None:
            store.publish(sample)
    if options.force_flag is not None:
        decision = dataclasses.replace(decision, flag=int(options.force_flag))
    driver_ms = (clock() - t0) * 1e3
    log.info("stage=driver flag=%d t_wfcmpb=%.6f t_fcm=%.6f wall_ms=%.3f",
             decision.flag, decision.t_wfcmpb, decision.t_fcm, driver_ms)

    # --- combine stage ---
    t0 = clock()
    outputs = _combine_stage(points, partition_plan, decision, params,
                             parallelism, options)
    combine_ms = (clock() - t0) * 1e3
    log.info("stage=combine partitions=%d iterations=%s wall_ms=%.3f",
             partition_plan.partition_count,
             [o.iterations for o in outputs], combine_ms)

    # --- reduce stage (hierarchical when the pool is large) ---
    t0 = clock()
    try:
        pool_centers, pool_weights = _pool_outputs(outputs)
        threshold = options.hierarchical_factor * c_int
        groups = 1
        intermediate_iterations = []
        if pool_centers.shape[0] > threshold:
            groups = -(-pool_centers.shape[0] // threshold)
            per = -(-len(outputs) // groups)
            partial = []
            for g in range(0, len(outputs), per):
                sub_c, sub_w = _pool_outputs(outputs[g:g + per])
                if sub_c.shape[0] <= c_int:
                    partial.append((sub_c, sub_w))
                    continue
                merged = _reduce_pool(sub_c, sub_w, c_int, params)
                intermediate_iterations.append(merged.iterations)
                partial.append((merged.centers, merged.weights))
            pool_centers = np.vstack([c for c, _ in partial])
            pool_weights = np.concatenate([w for _, w in partial])
        final = _reduce_pool(pool_centers, pool_weights, params.c, params)
    except Exception as exc:
        if isinstance(exc, StageError):
            raise
        raise StageError("reduce", str(exc)) from exc
    reduce_ms = (clock() - t0) * 1e3
    log.info("stage=reduce pooled=%d groups=%d iterations=%d wall_ms=%.3f",
             pool_centers.shape[0], groups, final.iterations, reduce_ms)

    objective = fcm_objective(sample, np.ones(sample.shape[0]),
                              final.centers, params.m)
    total_ms = (clock() - t_begin) * 1e3
    report = StageReport(
        flag=decision.flag,
        partition_count=partition_plan.partition_count,
        parallelism=parallelism,
        sample_size=decision.sample_size,
        sample_ms=sample_ms,
        driver_ms=driver_ms,
        combine_ms=combine_ms,
        reduce_ms=reduce_ms,
        total_ms=total_ms,
        driver_wfcmpb_iterations=decision.wfcmpb_iterations,
        driver_fcm_iterations=decision.fcm_iterations,
        combiner_iterations=tuple(o.iterations for o in outputs),
        intermediate_reducer_iterations=tuple(intermediate_iterations),
        reducer_iterations=final.iterations,
        hierarchical_groups=groups,
    )
    return ClusterModel(
        final_centers=final.centers,
        final_weights=final.weights,
        stage_report=report,
        objective=objective,
    )
