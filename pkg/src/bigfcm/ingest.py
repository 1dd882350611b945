"""Delimited-text ingestion, encoding, normalization and partition planning.

The readers are deliberately streaming-friendly: :func:`read_records`
yields one record per non-empty line so callers can reservoir-sample a
file bigger than memory, while :func:`load_dataset` materializes
everything for the in-memory pipeline.

Positions in error messages are 1-based (line and column), counting
physical lines including the header and blank lines.
"""

import dataclasses
import io
import logging
import os

import numpy as np

from .errors import ParseError

__all__ = [
    "DatasetSchema",
    "IngestResult",
    "PartitionPlan",
    "apply_minmax",
    "encode_categorical",
    "load_dataset",
    "normalize_minmax",
    "plan_partitions",
    "read_records",
]

log = logging.getLogger(__name__)


@dataclasses.dataclass(frozen=True)
class DatasetSchema:
    """How to interpret a delimited text source.

    ``label_column`` and ``categorical_columns`` are 0-based positions in
    the *file* row; the label column is removed from the feature vector.
    """

    delimiter: str = ","
    has_header: bool = False
    label_column: int = None
    categorical_columns: tuple = ()

    def __post_init__(self):
        if len(self.delimiter) != 1:
            raise ValueError(
                f"delimiter must be a single character, got {self.delimiter!r}"
            )
        object.__setattr__(
            self, "categorical_columns", tuple(sorted(set(self.categorical_columns)))
        )
        if self.label_column is not None and self.label_column < 0:
            raise ValueError(f"label_column must be >= 0, got {self.label_column}")
        for col in self.categorical_columns:
            if col < 0:
                raise ValueError(f"categorical column must be >= 0, got {col}")
        if self.label_column in self.categorical_columns:
            raise ValueError(
                f"column {self.label_column} cannot be both label and categorical"
            )


@dataclasses.dataclass(frozen=True)
class PartitionPlan:
    """Contiguous index ranges covering ``0..n``; sizes differ by at most 1."""

    partition_count: int
    boundaries: tuple  # ((start, stop), ...) half-open, ascending


@dataclasses.dataclass
class IngestResult:
    """Everything :func:`load_dataset` produced.

    ``features`` is the (n, d) float64 matrix after encoding and optional
    normalization; ``norm_stats`` is None when normalization was off.
    ``categorical_maps`` keys are positions within the feature vector.
    """

    features: np.ndarray
    labels: list
    norm_stats: list
    categorical_maps: dict
    schema: DatasetSchema


def _iter_lines(source):
    if isinstance(source, (str, os.PathLike)):
        with open(source, "r", encoding="utf-8") as fh:
            yield from fh
    elif isinstance(source, io.IOBase) or hasattr(source, "read"):
        yield from source
    else:
        yield from source


def read_records(source, schema):
    """Yield ``(fields, label)`` per non-empty data line.

    ``fields`` is a list mixing floats (numeric columns) and raw strings
    (categorical columns), with the label column removed; ``label`` is
    None when the schema names no label column. Numeric columns accept
    decimal and scientific notation. A malformed line raises
    :class:`ParseError` carrying the 1-based line (and column) position.
    The whole source being empty of data lines also raises.
    """
    expected = None
    saw_data = False
    for line_no, raw in enumerate(_iter_lines(source), start=1):
        if schema.has_header and line_no == 1:
            continue
        line = raw.strip()
        if not line:
            continue
        parts = [p.strip() for p in line.split(schema.delimiter)]
        if expected is None:
            expected = len(parts)
            _validate_schema_width(schema, expected)
        if len(parts) != expected:
            raise ParseError(
                f"expected {expected} fields, found {len(parts)}",
                line=line_no,
            )
        label = None
        fields = []
        for col, token in enumerate(parts):
            if col == schema.label_column:
                label = token
                continue
            if col in schema.categorical_columns:
                fields.append(token)
                continue
            try:
                fields.append(float(token))
            except ValueError:
                raise ParseError(
                    f"could not parse numeric field {token!r}",
                    line=line_no,
                    column=col + 1,
                ) from None
        saw_data = True
        yield fields, label
    if not saw_data:
        raise ValueError("no data records found in input")


def _validate_schema_width(schema, width):
    if schema.label_column is not None and schema.label_column >= width:
        raise ValueError(
            f"label_column {schema.label_column} out of range for {width}-field rows"
        )
    for col in schema.categorical_columns:
        if col >= width:
            raise ValueError(
                f"categorical column {col} out of range for {width}-field rows"
            )


def encode_categorical(rows, maps=None):
    """Turn mixed rows from :func:`read_records` into a float64 matrix.

    String-valued positions get ordinal codes in order of first
    appearance. ``maps`` (position -> {token: code}) can be passed in to
    reuse an existing encoding, e.g. to transform held-out data; unseen
    tokens extend the map. Returns ``(matrix, maps)``.
    """
    rows = list(rows)
    if not rows:
        raise ValueError("no rows to encode")
    if maps is None:
        maps = {}
    width = len(rows[0])
    out = np.empty((len(rows), width), dtype=np.float64)
    for r, row in enumerate(rows):
        if len(row) != width:
            raise ValueError(
                f"row {r} has {len(row)} fields, expected {width}"
            )
        for j, value in enumerate(row):
            if isinstance(value, str):
                codes = maps.setdefault(j, {})
                if value not in codes:
                    codes[value] = len(codes)
                out[r, j] = codes[value]
            else:
                out[r, j] = value
    return out, maps


def normalize_minmax(records):
    """Column-wise min-max scaling to [0, 1].

    Returns ``(scaled, stats)`` where ``stats`` is a list of per-column
    ``(minimum, maximum)`` pairs; constant columns map to 0. Reapplying
    the stats to the same data (see :func:`apply_minmax`) reproduces the
    scaled matrix exactly.
    """
    x = np.atleast_2d(np.asarray(records, dtype=np.float64))
    if x.size == 0:
        raise ValueError("cannot normalize an empty dataset")
    if not np.isfinite(x).all():
        raise ValueError("data contains non-finite values")
    mins = x.min(axis=0)
    maxs = x.max(axis=0)
    stats = [(float(lo), float(hi)) for lo, hi in zip(mins, maxs)]
    return apply_minmax(x, stats), stats


def apply_minmax(records, stats):
    """Apply previously computed min-max stats to ``records``."""
    x = np.atleast_2d(np.asarray(records, dtype=np.float64))
    if x.shape[1] != len(stats):
        raise ValueError(
            f"dimension mismatch: data has {x.shape[1]} columns, stats have {len(stats)}"
        )
    mins = np.array([lo for lo, _ in stats])
    spans = np.array([hi - lo for lo, hi in stats])
    spans[spans == 0.0] = 1.0
    return (x - mins) / spans


def plan_partitions(n, partitions):
    """Split ``range(n)`` into contiguous near-equal partitions.

    Requesting more partitions than records clamps to ``n`` with a
    warning on the ingest logger.
    """
    if n < 1:
        raise ValueError(f"cannot partition {n} records")
    if partitions < 1:
        raise ValueError(f"partition count must be >= 1, got {partitions}")
    if partitions > n:
        log.warning(
            "clamping partition count %d to record count %d", partitions, n
        )
        partitions = n
    base, extra = divmod(n, partitions)
    bounds = []
    start = 0
    for i in range(partitions):
        stop = start + base + (1 if i < extra else 0)
        bounds.append((start, stop))
        start = stop
    return PartitionPlan(partition_count=partitions, boundaries=tuple(bounds))


def load_dataset(source, schema, normalize=True):
    """Read, encode and optionally normalize a whole source.

    Returns an :class:`IngestResult`. ``labels`` is a list of raw label
    strings (all None when the schema has no label column).
    """
    pairs = list(read_records(source, schema))
    rows = [fields for fields, _ in pairs]
    labels = [label for _, label in pairs]
    features, maps = encode_categorical(rows)
    stats = None
    if normalize:
        features, stats = normalize_minmax(features)
    return IngestResult(
        features=features,
        labels=labels,
        norm_stats=stats,
        categorical_maps=maps,
        schema=schema,
    )
