"""Scikit-learn baselines and cross-implementation parity checks for the
dataset/metrics file formats exported by the modeling pipeline."""

from .harness import (
    DATASET_COLUMNS,
    REPORT_SCHEMA,
    HarnessSchemaError,
    compare_reports,
    format_delta_table,
    load_dataset_csv,
    load_report,
    metrics_report,
    run_baselines,
    validate_report,
)

__version__ = "0.1.0"

__all__ = [
    "DATASET_COLUMNS",
    "REPORT_SCHEMA",
    "HarnessSchemaError",
    "compare_reports",
    "format_delta_table",
    "load_dataset_csv",
    "load_report",
    "metrics_report",
    "run_baselines",
    "validate_report",
]
