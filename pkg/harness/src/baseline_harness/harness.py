"""Reference-library baselines over the dataset export CSVs, plus report
parity checks. This package never imports the artifact under test; the CSV
and metrics-JSON files are the whole contract."""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np
from jsonschema import Draft202012Validator
from sklearn.ensemble import GradientBoostingClassifier, RandomForestClassifier

DATASET_COLUMNS = ("label", "latitude", "longitude", "elevation",
                   "precipitation", "temperature")

METRIC_FIELDS = ("accuracy", "precision", "recall", "f1", "auc")

REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "properties": {
        "species": {"type": "string"},
        "model": {"type": "string"},
        "split": {"type": "string"},
        "accuracy": {"type": "number", "minimum": 0, "maximum": 1},
        "precision": {"type": "number", "minimum": 0, "maximum": 1},
        "recall": {"type": "number", "minimum": 0, "maximum": 1},
        "f1": {"type": "number", "minimum": 0, "maximum": 1},
        "auc": {"type": "number", "minimum": 0, "maximum": 1},
        "confusion": {
            "type": "object",
            "properties": {
                "tp": {"type": "integer", "minimum": 0},
                "fp": {"type": "integer", "minimum": 0},
                "fn": {"type": "integer", "minimum": 0},
                "tn": {"type": "integer", "minimum": 0},
            },
            "required": ["tp", "fp", "fn", "tn"],
            "additionalProperties": False,
        },
        "degenerate": {"type": "array", "items": {"type": "string"}},
    },
    "required": ["species", "model", "split", "accuracy", "precision",
                 "recall", "f1", "auc", "confusion", "degenerate"],
    "additionalProperties": False,
}

_validator = Draft202012Validator(REPORT_SCHEMA)


class HarnessSchemaError(ValueError):
    """A CSV or report file violates the interchange contract."""


def load_dataset_csv(path) -> tuple[np.ndarray, np.ndarray]:
    """Read an exported dataset CSV into (X, y), enforcing the exact header."""
    with open(path, "r", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = tuple(h.strip() for h in next(reader))
        except StopIteration:
            raise HarnessSchemaError(f"{path}: empty file") from None
        if header != DATASET_COLUMNS:
            raise HarnessSchemaError(
                f"{path}: expected columns {','.join(DATASET_COLUMNS)}, "
                f"got {','.join(header)}")
        labels: list[int] = []
        rows: list[list[float]] = []
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(DATASET_COLUMNS):
                raise HarnessSchemaError(
                    f"{path}:{line_no}: expected {len(DATASET_COLUMNS)} fields")
            try:
                labels.append(int(row[0]))
                rows.append([float(v) for v in row[1:]])
            except ValueError as exc:
                raise HarnessSchemaError(f"{path}:{line_no}: {exc}") from None
    if not rows:
        raise HarnessSchemaError(f"{path}: no data rows")
    y = np.array(labels, dtype=int)
    if not set(np.unique(y).tolist()) <= {0, 1}:
        raise HarnessSchemaError(f"{path}: labels must be 0/1")
    return np.array(rows, dtype=float), y


def matched_feature_count(arity: int) -> int:
    """ceil(sqrt(arity)), the per-node candidate count the artifact defaults to."""
    return math.ceil(math.sqrt(arity))


def build_baseline(model: str, arity: int, trees: int = 100, max_depth: int | None = None,
                   min_samples_split: int = 2, eta: float = 0.1,
                   seed: int | None = None):
    if model == "rf":
        return RandomForestClassifier(
            n_estimators=trees,
            max_depth=max_depth if max_depth is not None else 10,
            min_samples_split=min_samples_split,
            max_features=matched_feature_count(arity),
            random_state=seed,
        )
    if model == "gbt":
        return GradientBoostingClassifier(
            n_estimators=trees,
            learning_rate=eta,
            max_depth=max_depth if max_depth is not None else 3,
            min_samples_split=min_samples_split,
            random_state=seed,
        )
    raise ValueError(f"unknown model {model!r}")


def _auc_rank(y: np.ndarray, scores: np.ndarray) -> float:
    """Mann-Whitney AUC with half credit for ties (average ranks)."""
    order = np.argsort(scores, kind="mergesort")
    sv = scores[order]
    n = sv.size
    starts = np.nonzero(np.r_[True, sv[1:] != sv[:-1]])[0]
    ends = np.r_[starts[1:], n]
    ranks = np.empty(n)
    ranks[order] = np.repeat((starts + ends + 1) / 2.0, ends - starts)
    n_pos = int((y == 1).sum())
    n_neg = y.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("AUC undefined for single-class labels")
    return float((ranks[y == 1].sum() - n_pos * (n_pos + 1) / 2.0)
                 / (n_pos * n_neg))


def metrics_report(y_true: np.ndarray, probs: np.ndarray, theta: float,
                   species: str, model: str, split: str) -> dict:
    """The same report document the artifact emits, computed independently."""
    preds = (probs >= theta).astype(int)
    tp = int(((y_true == 1) & (preds == 1)).sum())
    fp = int(((y_true == 0) & (preds == 1)).sum())
    fn = int(((y_true == 1) & (preds == 0)).sum())
    tn = int(((y_true == 0) & (preds == 0)).sum())
    degenerate = []
    precision = tp / (tp + fp) if tp + fp else 0.0
    if not tp + fp:
        degenerate.append("precision")
    recall = tp / (tp + fn) if tp + fn else 0.0
    if not tp + fn:
        degenerate.append("recall")
    f1 = 2 * precision * recall / (precision + recall) \
        if precision + recall else 0.0
    if not precision + recall:
        degenerate.append("f1")
    return {
        "species": species,
        "model": model,
        "split": split,
        "accuracy": (tp + tn) / y_true.size,
        "precision": precision,
        "recall": recall,
        "f1": f1,
        "auc": _auc_rank(y_true, probs),
        "confusion": {"tp": tp, "fp": fp, "fn": fn, "tn": tn},
        "degenerate": degenerate,
    }


def run_baselines(train_csv, test_csv, models=("rf", "gbt"), trees: int = 100,
                  max_depth: int | None = None, min_samples_split: int = 2,
                  eta: float = 0.1, theta: float = 0.5,
                  seed: int | None = None, species: str = "unspecified",
                  split: str = "test") -> dict[str, dict]:
    """Train reference models on the exported train CSV and report on the
    test CSV; returns {model_name: report_dict}."""
    X_train, y_train = load_dataset_csv(train_csv)
    X_test, y_test = load_dataset_csv(test_csv)
    if X_train.shape[1] != X_test.shape[1]:
        raise HarnessSchemaError("train and test CSVs disagree on arity")
    reports = {}
    for model_name in models:
        clf = build_baseline(model_name, X_train.shape[1], trees=trees,
                             max_depth=max_depth,
                             min_samples_split=min_samples_split, eta=eta,
                             seed=seed)
        clf.fit(X_train, y_train)
        probs = clf.predict_proba(X_test)[:, 1]
        reports[model_name] = metrics_report(
            y_test, probs, theta, species=species,
            model=f"sk-{model_name}", split=split)
    return reports


def validate_report(report: dict, source: str = "report") -> None:
    errors = sorted(_validator.iter_errors(report), key=lambda e: e.json_path)
    if errors:
        first = errors[0]
        raise HarnessSchemaError(f"{source}: {first.json_path}: {first.message}")


def compare_reports(primary: dict, baseline: dict,
                    tolerance: float = 0.07) -> dict:
    """Field-by-field deltas plus a pass/fail verdict on accuracy and AUC."""
    validate_report(primary, "primary report")
    validate_report(baseline, "baseline report")
    deltas = {name: baseline[name] - primary[name] for name in METRIC_FIELDS}
    deltas["confusion"] = {
        key: baseline["confusion"][key] - primary["confusion"][key]
        for key in ("tp", "fp", "fn", "tn")}
    passed = (abs(deltas["accuracy"]) <= tolerance
              and abs(deltas["auc"]) <= tolerance)
    return {
        "primary_model": primary["model"],
        "baseline_model": baseline["model"],
        "tolerance": tolerance,
        "deltas": deltas,
        "passed": passed,
    }


def format_delta_table(comparison: dict) -> str:
    lines = [
        f"parity: {comparison['primary_model']} vs "
        f"{comparison['baseline_model']} (tolerance "
        f"{comparison['tolerance']})",
        f"{'metric':<12}{'delta':>10}",
    ]
    for name in METRIC_FIELDS:
        flag = ""
        if name in ("accuracy", "auc") and \
                abs(comparison["deltas"][name]) > comparison["tolerance"]:
            flag = "  <-- exceeds tolerance"
        lines.append(f"{name:<12}{comparison['deltas'][name]:>+10.4f}{flag}")
    cm = comparison["deltas"]["confusion"]
    lines.append(f"{'confusion':<12}tp{cm['tp']:+d} fp{cm['fp']:+d} "
                 f"fn{cm['fn']:+d} tn{cm['tn']:+d}")
    lines.append("PASS" if comparison["passed"] else "FAIL")
    return "\n".join(lines)


def load_report(path) -> dict:
    try:
        payload = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise HarnessSchemaError(f"{path}: not valid JSON: {exc}") from None
    if not isinstance(payload, dict):
        raise HarnessSchemaError(f"{path}: expected a JSON object")
    return payload
