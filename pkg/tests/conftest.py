"""Session fixtures: benchmark CSV files written once per run."""

import os

import numpy as np
import pytest


@pytest.fixture(scope="session")
def iris_csv(tmp_path_factory):
    """The 150-flower measurement set as a label-last CSV."""
    from sklearn.datasets import load_iris

    data = load_iris()
    path = tmp_path_factory.mktemp("data") / "iris.csv"
    lines = []
    for row, target in zip(data.data, data.target):
        name = data.target_names[target]
        lines.append(",".join(f"{v:.1f}" for v in row) + f",{name}")
    path.write_text("\n".join(lines) + "\n")
    return str(path)


# Class-conditional moments of the diabetes screening dataset (768 rows,
# 500 negative / 268 positive; 8 features: pregnancies, glucose, blood
# pressure, skin thickness, insulin, BMI, pedigree, age), as published.
# Zero-coded missing values are part of these moments.
_DIABETES_NEG = (
    [3.298, 109.980, 68.184, 19.664, 68.792, 30.304, 0.430, 31.190],
    [3.017, 26.141, 18.063, 14.890, 98.865, 7.690, 0.299, 11.668],
)
_DIABETES_POS = (
    [4.866, 141.257, 70.825, 22.164, 100.336, 35.143, 0.551, 37.067],
    [3.741, 31.940, 21.492, 17.680, 138.689, 7.263, 0.372, 10.968],
)


def _reconstruct_diabetes(path, seed=20240817):
    """Statistical stand-in for the diabetes dataset.

    The real file ships with neither the repository nor the package
    index in this environment, so the accuracy gate runs against a
    per-class Gaussian reconstruction from the published moments. A real
    CSV (8 numeric columns + 0/1 label) at data/pima.csv or $PIMA_CSV
    takes precedence; see conftest.pima_csv.
    """
    rng = np.random.default_rng(seed)
    rows = []
    for label, (means, sds), count in (
        ("0", _DIABETES_NEG, 500),
        ("1", _DIABETES_POS, 268),
    ):
        block = rng.normal(means, sds, size=(count, 8))
        block = np.clip(block, 0.0, None)
        block[:, 7] = np.clip(block[:, 7], 21.0, None)  # adult cohort
        for row in block:
            cells = [
                f"{row[0]:.0f}", f"{row[1]:.0f}", f"{row[2]:.0f}",
                f"{row[3]:.0f}", f"{row[4]:.0f}", f"{row[5]:.1f}",
                f"{row[6]:.3f}", f"{row[7]:.0f}",
            ]
            rows.append(",".join(cells) + f",{label}")
    order = rng.permutation(len(rows))
    with open(path, "w") as fh:
        fh.write("\n".join(rows[i] for i in order) + "\n")


@pytest.fixture(scope="session")
def pima_csv(tmp_path_factory):
    """Diabetes screening CSV: real file when available, else the
    reconstruction (see _reconstruct_diabetes)."""
    for candidate in (os.environ.get("PIMA_CSV"),
                      os.path.join(os.path.dirname(__file__), "..", "data",
                                   "pima.csv")):
        if candidate and os.path.exists(candidate):
            return candidate
    path = tmp_path_factory.mktemp("data") / "pima.csv"
    _reconstruct_diabetes(str(path))
    return str(path)
