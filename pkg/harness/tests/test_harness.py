import json

import numpy as np
import pytest

from baseline_harness import (
    HarnessSchemaError,
    compare_reports,
    format_delta_table,
    load_dataset_csv,
    metrics_report,
    run_baselines,
    validate_report,
)

HEADER = "label,latitude,longitude,elevation,precipitation,temperature"


def write_two_cluster_csv(path, n=120, separation=5.0, seed=0):
    rng = np.random.default_rng(seed)
    rows = [HEADER]
    for label in (1, 0):
        shift = separation if label else 0.0
        for _ in range(n // 2):
            values = rng.normal(loc=shift, scale=1.0, size=5)
            rows.append(",".join([str(label)] + [repr(float(v)) for v in values]))
    path.write_text("\n".join(rows) + "\n")
    return path


def sample_report(**overrides):
    report = {
        "species": "synthetic", "model": "rf", "split": "test",
        "accuracy": 0.9, "precision": 0.88, "recall": 0.92, "f1": 0.9,
        "auc": 0.95,
        "confusion": {"tp": 45, "fp": 6, "fn": 4, "tn": 45},
        "degenerate": [],
    }
    report.update(overrides)
    return report


# ---------------------------------------------------------------------------
# CSV contract
# ---------------------------------------------------------------------------

def test_load_dataset_csv_roundtrip(tmp_path):
    path = write_two_cluster_csv(tmp_path / "d.csv", n=40)
    X, y = load_dataset_csv(path)
    assert X.shape == (40, 5)
    assert sorted(np.unique(y).tolist()) == [0, 1]


def test_load_dataset_csv_rejects_swapped_columns(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("label,longitude,latitude,elevation,precipitation,"
                    "temperature\n1,1,2,3,4,5\n")
    with pytest.raises(HarnessSchemaError, match="expected columns"):
        load_dataset_csv(path)


def test_load_dataset_csv_rejects_bad_labels(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text(HEADER + "\n2,1,2,3,4,5\n")
    with pytest.raises(HarnessSchemaError, match="0/1"):
        load_dataset_csv(path)


# ---------------------------------------------------------------------------
# baselines
# ---------------------------------------------------------------------------

def test_baselines_learn_separable_fixture(tmp_path):
    train = write_two_cluster_csv(tmp_path / "train.csv", n=200, seed=1)
    test = write_two_cluster_csv(tmp_path / "test.csv", n=80, seed=2)
    reports = run_baselines(train, test, seed=7)
    assert set(reports) == {"rf", "gbt"}
    for name, report in reports.items():
        validate_report(report)
        assert report["model"] == f"sk-{name}"
        assert report["accuracy"] >= 0.95
        assert report["auc"] >= 0.95


def test_baselines_deterministic_given_seed(tmp_path):
    train = write_two_cluster_csv(tmp_path / "train.csv", n=100, seed=3)
    test = write_two_cluster_csv(tmp_path / "test.csv", n=60, seed=4)
    a = run_baselines(train, test, trees=20, seed=11)
    b = run_baselines(train, test, trees=20, seed=11)
    assert json.dumps(a) == json.dumps(b)


def test_metrics_report_degenerate_flags():
    y = np.array([1, 1, 0])
    probs = np.array([0.2, 0.1, 0.3])
    report = metrics_report(y, probs, theta=0.5, species="s", model="m",
                            split="test")
    assert report["precision"] == 0.0
    assert report["degenerate"] == ["precision", "f1"]
    validate_report(report)


def test_metrics_report_auc_handles_ties():
    y = np.array([1, 0])
    probs = np.array([0.5, 0.5])
    report = metrics_report(y, probs, theta=0.5, species="s", model="m",
                            split="test")
    assert report["auc"] == 0.5


# ---------------------------------------------------------------------------
# comparisons
# ---------------------------------------------------------------------------

def test_compare_identical_reports_passes_with_zero_deltas():
    comparison = compare_reports(sample_report(), sample_report())
    assert comparison["passed"] is True
    assert all(comparison["deltas"][m] == 0 for m in
               ("accuracy", "precision", "recall", "f1", "auc"))
    assert "PASS" in format_delta_table(comparison)


def test_compare_fails_beyond_tolerance():
    baseline = sample_report(accuracy=0.8)
    comparison = compare_reports(sample_report(accuracy=0.9), baseline,
                                 tolerance=0.07)
    assert comparison["passed"] is False
    assert comparison["deltas"]["accuracy"] == pytest.approx(-0.1)
    assert "FAIL" in format_delta_table(comparison)


def test_compare_missing_field_is_schema_error():
    broken = sample_report()
    del broken["auc"]
    with pytest.raises(HarnessSchemaError, match="auc"):
        compare_reports(sample_report(), broken)


def test_compare_extra_field_is_schema_error():
    padded = sample_report()
    padded["theta"] = 0.5
    with pytest.raises(HarnessSchemaError):
        compare_reports(sample_report(), padded)


def test_validate_report_checks_nested_confusion():
    broken = sample_report()
    del broken["confusion"]["tn"]
    with pytest.raises(HarnessSchemaError, match="tn"):
        validate_report(broken)
