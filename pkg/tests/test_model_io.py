"""Model file and ingest-sidecar round trips."""

import numpy as np
import pytest

from bigfcm.ingest import DatasetSchema
from bigfcm.model_io import (ingest_sidecar_path, read_model, read_sidecar,
                             write_model, write_sidecar)

CENTERS = np.array([[0.1234567890123456, 2.0], [-3.5, 1e-17]])
WEIGHTS = np.array([12.25, 700.125])


def write_sample(path):
    write_model(
        path, CENTERS, WEIGHTS, 0.25,
        stage_fields={"flag": 1, "combiner_iterations": (3, 4),
                      "total_ms": 12.5},
        config_echo={"clusters": "2", "epsilon": "5e-07"},
    )


def test_model_roundtrip_is_exact(tmp_path):
    path = tmp_path / "model.txt"
    write_sample(path)
    model = read_model(path)
    assert np.array_equal(model["centers"], CENTERS)  # repr round-trips
    assert np.array_equal(model["weights"], WEIGHTS)
    assert model["objective"] == 0.25
    assert model["config"] == {"clusters": "2", "epsilon": "5e-07"}
    assert model["stages"]["flag"] == "1"
    assert model["stages"]["combiner_iterations"] == "3,4"


def test_identical_writes_identical_bytes(tmp_path):
    a, b = tmp_path / "a.txt", tmp_path / "b.txt"
    write_sample(a)
    write_sample(b)
    assert a.read_bytes() == b.read_bytes()


def test_model_without_centers_rejected(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("[config]\nclusters = 2\n")
    with pytest.raises(ValueError, match="no centers"):
        read_model(path)


def test_sidecar_roundtrip(tmp_path):
    model_path = tmp_path / "model.txt"
    schema = DatasetSchema(delimiter=";", has_header=True, label_column=4,
                           categorical_columns=(1, 2))
    write_sidecar(model_path, [(0.0, 10.0), (-1.0, 1.0)],
                  {1: {"red": 0, "blue": 1}}, schema)
    side = read_sidecar(model_path)
    assert side["norm_stats"] == [(0.0, 10.0), (-1.0, 1.0)]
    assert side["categorical_maps"] == {1: {"red": 0, "blue": 1}}
    assert side["schema"]["delimiter"] == ";"
    assert side["schema"]["has_header"] is True
    assert side["schema"]["label_column"] == 4
    assert side["schema"]["categorical_columns"] == [1, 2]


def test_sidecar_absent_returns_none(tmp_path):
    assert read_sidecar(tmp_path / "nothing.txt") is None


def test_sidecar_path_is_model_path_plus_suffix(tmp_path):
    assert ingest_sidecar_path("/x/y/model.txt") == "/x/y/model.txt.ingest.json"
