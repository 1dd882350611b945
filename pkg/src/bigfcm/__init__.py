"""Scalable fuzzy c-means over partitioned data.

A three-stage pipeline (driver, parallel combiners, weighted reducer)
clusters large datasets with a constant memory footprint per worker:
solvers stream points through compiled accumulation kernels instead of
materializing membership matrices. See the README for the command-line
interface.
"""

from .errors import (DegenerateDataError, ParseError, StageError,
                     UndefinedMetricError)
from .ingest import DatasetSchema, IngestResult, PartitionPlan, load_dataset, \
    plan_partitions
from .metrics import EvalReport, assign, confusion_accuracy, \
    relative_speedup, silhouette_width
from .pipeline import (ClusterModel, CombinerOutput, DriverDecision,
                       PipelineOptions, SeedStore, StageReport, derive_rng,
                       run_bigfcm, run_combiner, run_driver, run_reducer)
from .sampling import (SampleSpec, V_ALPHA_TABLE, default_sample_size,
                       parker_hall_size, reservoir_sample, thompson_size)
from .solvers import (FcmParams, SolveResult, converged, fcm_fast, fcm_naive,
                      initial_centers, wfcm, wfcmpb)

__version__ = "0.1.0"

__all__ = [
    "ClusterModel",
    "CombinerOutput",
    "DatasetSchema",
    "DegenerateDataError",
    "DriverDecision",
    "EvalReport",
    "FcmParams",
    "IngestResult",
    "ParseError",
    "PartitionPlan",
    "PipelineOptions",
    "SampleSpec",
    "SeedStore",
    "SolveResult",
    "StageError",
    "StageReport",
    "UndefinedMetricError",
    "V_ALPHA_TABLE",
    "__version__",
    "assign",
    "confusion_accuracy",
    "converged",
    "default_sample_size",
    "derive_rng",
    "fcm_fast",
    "fcm_naive",
    "initial_centers",
    "load_dataset",
    "parker_hall_size",
    "plan_partitions",
    "relative_speedup",
    "reservoir_sample",
    "run_bigfcm",
    "run_combiner",
    "run_driver",
    "run_reducer",
    "silhouette_width",
    "thompson_size",
    "wfcm",
    "wfcmpb",
]
