"""Command-line interface, exercised in-process through main()."""

import numpy as np
import pytest
from helpers import gaussian_mixture

from bigfcm.cli import load_config_file, main
from bigfcm.model_io import read_model, read_sidecar


@pytest.fixture(scope="module")
def blob_csv(tmp_path_factory):
    """160 labeled points in two tight, well-separated 2-D clusters."""
    pts, labels = gaussian_mixture([[0.0, 0.0], [10.0, 10.0]], 0.5, 80, seed=14)
    path = tmp_path_factory.mktemp("data") / "blobs.csv"
    lines = [f"{x:.6f},{y:.6f},c{lab}" for (x, y), lab in zip(pts, labels)]
    path.write_text("\n".join(lines) + "\n")
    return path


@pytest.fixture(scope="module")
def numeric_csv(tmp_path_factory):
    """Unlabeled 3-column numeric data."""
    rng = np.random.default_rng(3)
    path = tmp_path_factory.mktemp("data") / "numeric.csv"
    rows = rng.normal(size=(50, 3))
    path.write_text("\n".join(",".join(f"{v:.4f}" for v in r) for r in rows))
    return path


def run_cluster(csv, out, *extra):
    return main(["cluster", "--input", str(csv), "--clusters", "2",
                 "--label-column", "2", "--seed", "5",
                 "--output", str(out), *extra])


def centers_block(path):
    text = path.read_text()
    return text[text.index("[centers]"):text.index("[weights]")]


def test_cluster_writes_model_and_sidecar(tmp_path, blob_csv, capsys):
    out = tmp_path / "model.txt"
    assert run_cluster(blob_csv, out) == 0
    captured = capsys.readouterr()
    assert f"model written: {out}" in captured.out
    assert "flag=" in captured.out
    # stage accounting is logged to stderr
    assert "stage=driver" in captured.err
    assert "stage=reduce" in captured.err

    model = read_model(out)
    assert model["centers"].shape == (2, 2)
    assert model["config"]["clusters"] == "2"
    assert model["config"]["input"] == str(blob_csv)
    side = read_sidecar(out)
    assert side["schema"]["label_column"] == 2
    assert len(side["norm_stats"]) == 2


def test_cluster_repeat_runs_byte_identical_centers(tmp_path, blob_csv):
    a, b = tmp_path / "a.txt", tmp_path / "b.txt"
    assert run_cluster(blob_csv, a, "--force-flag", "1") == 0
    assert run_cluster(blob_csv, b, "--force-flag", "1") == 0
    assert centers_block(a) == centers_block(b)


def test_eval_reports_metrics(tmp_path, blob_csv, capsys):
    out = tmp_path / "model.txt"
    run_cluster(blob_csv, out)
    capsys.readouterr()
    report_path = tmp_path / "report.txt"
    assert main(["eval", "--model", str(out), "--input", str(blob_csv),
                 "--output", str(report_path)]) == 0
    captured = capsys.readouterr()
    assert "accuracy   = 1.000000" in captured.out
    assert "silhouette = " in captured.out
    assert "-> c0" in captured.out and "-> c1" in captured.out
    assert "[config]" in captured.out
    assert "eval_ms" in captured.out
    assert report_path.read_text() == captured.out


def test_eval_requires_label_column(tmp_path, numeric_csv, capsys):
    out = tmp_path / "model.txt"
    assert main(["cluster", "--input", str(numeric_csv), "--clusters", "2",
                 "--output", str(out)]) == 0
    capsys.readouterr()
    assert main(["eval", "--model", str(out),
                 "--input", str(numeric_csv)]) == 1
    assert "label column required" in capsys.readouterr().err


def test_eval_checks_dimensions(tmp_path, numeric_csv, blob_csv, capsys):
    out = tmp_path / "model3d.txt"
    main(["cluster", "--input", str(numeric_csv), "--clusters", "2",
          "--output", str(out)])
    capsys.readouterr()
    code = main(["eval", "--model", str(out), "--input", str(blob_csv),
                 "--label-column", "2"])
    assert code == 1
    err = capsys.readouterr().err
    # caught while reapplying the stored normalization: widths disagree
    assert "error: eval: dimension mismatch" in err
    assert "2" in err and "3" in err


def test_eval_missing_model(tmp_path, capsys):
    assert main(["eval", "--model", str(tmp_path / "no.txt")]) == 1
    assert "error: model:" in capsys.readouterr().err


def test_cluster_requires_input(capsys):
    assert main(["cluster", "--clusters", "2"]) == 1
    assert "error: ingest:" in capsys.readouterr().err


def test_cluster_missing_file(tmp_path, capsys):
    assert main(["cluster", "--input", str(tmp_path / "gone.csv")]) == 1
    assert "input path not found" in capsys.readouterr().err


def test_cluster_reports_parse_position(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("1,2\n1,oops\n")
    assert main(["cluster", "--input", str(bad), "--clusters", "2"]) == 1
    err = capsys.readouterr().err
    assert "error: ingest:" in err and "line 2, column 2" in err


def test_cluster_rejects_bad_params(tmp_path, blob_csv, capsys):
    out = tmp_path / "m.txt"
    code = main(["cluster", "--input", str(blob_csv), "--clusters", "2",
                 "--label-column", "2", "--fuzzifier", "1.0",
                 "--output", str(out)])
    assert code == 1
    assert "error: config:" in capsys.readouterr().err


class TestConfigFile:
    def test_parse(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text(
            "# a comment\n"
            "clusters = 3\n"
            "\n"
            "rel-diff = 0.2\n"  # dashes normalize to underscores
            "normalize = off\n"
        )
        values = load_config_file(cfg)
        assert values == {"clusters": 3, "rel_diff": 0.2, "normalize": False}

    def test_unknown_key(self, tmp_path, capsys):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("bogus = 1\n")
        assert main(["cluster", "--config", str(cfg)]) == 1
        err = capsys.readouterr().err
        assert "error: config:" in err and "unknown key 'bogus'" in err

    def test_missing_separator(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("clusters\n")
        with pytest.raises(ValueError, match="key=value"):
            load_config_file(cfg)

    def test_flags_override_file(self, tmp_path, blob_csv):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("clusters = 3\nseed = 4\n")
        out = tmp_path / "m.txt"
        code = main(["cluster", "--config", str(cfg), "--input", str(blob_csv),
                     "--label-column", "2", "--clusters", "2",
                     "--output", str(out)])
        assert code == 0
        config = read_model(out)["config"]
        assert config["clusters"] == "2"  # flag wins
        assert config["seed"] == "4"      # file beats default


class TestSampleSize:
    def test_cluster_count_formula(self, capsys):
        assert main(["sample-size", "--clusters", "5", "--rel-diff", "0.10"]) == 0
        out = capsys.readouterr().out
        assert "lambda = ceil(1.27359 * 5^2 / 0.1^2) = 3184" in out

    def test_default_rel_diff(self, capsys):
        assert main(["sample-size", "--clusters", "2"]) == 0
        assert "= 510" in capsys.readouterr().out

    def test_proportion_formula(self, capsys):
        assert main(["sample-size", "--abs-diff", "0.1"]) == 0
        assert "lambda = ceil(1.27359 / 0.1^2) = 128" in capsys.readouterr().out

    def test_unsupported_alpha(self, capsys):
        assert main(["sample-size", "--alpha", "0.5", "--clusters", "2"]) == 1
        err = capsys.readouterr().err
        assert "alpha=0.5" in err and "0.05" in err

    def test_clusters_required_without_abs_diff(self, capsys):
        assert main(["sample-size"]) == 1
        assert "--clusters is required" in capsys.readouterr().err

    def test_config_extends_alpha_table(self, tmp_path, capsys):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("v_alpha_table = 0.10:0.9\n")
        assert main(["sample-size", "--config", str(cfg), "--alpha", "0.10",
                     "--clusters", "2"]) == 0
        assert "lambda = ceil(0.9 * 2^2 / 0.1^2) = 360" in capsys.readouterr().out


class TestBench:
    def test_epsilon_sweep(self, blob_csv, capsys):
        code = main(["bench", "--mode", "epsilon-sweep", "--input",
                     str(blob_csv), "--clusters", "2", "--label-column", "2",
                     "--epsilons", "5e-2,5e-3"])
        assert code == 0
        out = capsys.readouterr().out
        assert "value\twall_ms\titerations\tobjective" in out
        assert out.count("\n5e-") + out.count("\n0.05") >= 1
        rows = [l for l in out.splitlines()
                if l and not l.startswith(("#", "value"))]
        assert len(rows) == 2

    def test_partition_sweep(self, blob_csv, capsys):
        code = main(["bench", "--mode", "partition-sweep", "--input",
                     str(blob_csv), "--clusters", "2", "--label-column", "2",
                     "--partition-list", "1,2"])
        assert code == 0
        rows = [l for l in capsys.readouterr().out.splitlines()
                if l and not l.startswith(("#", "value"))]
        assert [r.split("\t")[0] for r in rows] == ["1", "2"]

    def test_baseline_compare_reports_speedup(self, blob_csv, capsys):
        code = main(["bench", "--mode", "baseline-compare", "--input",
                     str(blob_csv), "--clusters", "2", "--label-column", "2"])
        assert code == 0
        out = capsys.readouterr().out
        assert "# relative_speedup = " in out
        assert "\nbigfcm\t" in out and "\nfcm_fast\t" in out

    def test_budget_marks_incomplete(self, blob_csv, capsys):
        code = main(["bench", "--mode", "epsilon-sweep", "--input",
                     str(blob_csv), "--clusters", "2", "--label-column", "2",
                     "--budget", "0"])
        assert code == 1
        assert "# incomplete: time budget exceeded" in capsys.readouterr().out
