"""Model file reading and writing.

The model file is plain sectioned text: a ``[config]`` echo of the full
effective run configuration, a ``[stages]`` block with timings and
iteration counts, then ``[centers]`` and ``[weights]`` blocks. Floats
are written with ``repr``, which round-trips float64 exactly, so two
identical runs produce byte-identical center blocks.

Ingestion state (normalization stats and categorical code maps) needed
to transform held-out data lives in a JSON sidecar next to the model,
``<model>.ingest.json``.
"""

import json
import os

import numpy as np

__all__ = [
    "ingest_sidecar_path",
    "read_model",
    "read_sidecar",
    "write_model",
    "write_sidecar",
]


def _fmt(value):
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (tuple, list)):
        return ",".join(_fmt(v) for v in value)
    return str(value)


def write_model(path, centers, weights, objective, stage_fields, config_echo):
    """Write one clustering model as sectioned text.

    ``stage_fields`` and ``config_echo`` are flat mappings; keys are
    written in sorted order so output layout is deterministic.
    """
    centers = np.atleast_2d(np.asarray(centers, dtype=np.float64))
    weights = np.asarray(weights, dtype=np.float64)
    lines = ["[config]"]
    for key in sorted(config_echo):
        lines.append(f"{key} = {_fmt(config_echo[key])}")
    lines.append("")
    lines.append("[stages]")
    for key in sorted(stage_fields):
        lines.append(f"{key} = {_fmt(stage_fields[key])}")
    lines.append(f"objective = {_fmt(float(objective))}")
    lines.append("")
    lines.append("[centers]")
    for row in centers:
        lines.append(" ".join(repr(float(v)) for v in row))
    lines.append("")
    lines.append("[weights]")
    lines.append(" ".join(repr(float(v)) for v in weights))
    lines.append("")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines))


def read_model(path):
    """Parse a model file back into a dict.

    Returns keys ``config`` (str->str), ``stages`` (str->str),
    ``centers`` (ndarray), ``weights`` (ndarray) and ``objective``
    (float).
    """
    config = {}
    stages = {}
    center_rows = []
    weights = np.empty(0)
    section = None
    with open(path, "r", encoding="utf-8") as fh:
        for raw in fh:
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if line.startswith("[") and line.endswith("]"):
                section = line[1:-1]
                continue
            if section == "config" or section == "stages":
                key, _, value = line.partition("=")
                target = config if section == "config" else stages
                target[key.strip()] = value.strip()
            elif section == "centers":
                center_rows.append([float(v) for v in line.split()])
            elif section == "weights":
                weights = np.array([float(v) for v in line.split()])
    if not center_rows:
        raise ValueError(f"model file {path} has no centers section")
    objective = float(stages.pop("objective", "nan"))
    return {
        "config": config,
        "stages": stages,
        "centers": np.array(center_rows),
        "weights": weights,
        "objective": objective,
    }


def ingest_sidecar_path(model_path):
    return os.fspath(model_path) + ".ingest.json"


def write_sidecar(model_path, norm_stats, categorical_maps, schema):
    """Persist the ingestion transform next to the model."""
    payload = {
        "norm_stats": norm_stats,
        "categorical_maps": {str(k): v for k, v in (categorical_maps or {}).items()},
        "schema": {
            "delimiter": schema.delimiter,
            "has_header": schema.has_header,
            "label_column": schema.label_column,
            "categorical_columns": list(schema.categorical_columns),
        },
    }
    with open(ingest_sidecar_path(model_path), "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=1)


def read_sidecar(model_path):
    """Load the ingestion sidecar, or None when it does not exist."""
    path = ingest_sidecar_path(model_path)
    if not os.path.exists(path):
        return None
    with open(path, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    maps = {int(k): v for k, v in payload.get("categorical_maps", {}).items()}
    stats = payload.get("norm_stats")
    if stats is not None:
        stats = [(float(lo), float(hi)) for lo, hi in stats]
    return {"norm_stats": stats, "categorical_maps": maps,
            "schema": payload.get("schema", {})}
