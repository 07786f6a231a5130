"""Species distribution modeling on climate rasters: dataset assembly from
presence observations and pseudo-absences, from-scratch tree ensembles, and
evaluation/map emission."""

from .ensemble import (
    GradientBoosting,
    RandomForest,
    feature_importance,
    load_model,
    model_from_dict,
    model_to_dict,
    predict_gbt,
    predict_random_forest,
    save_model,
)
from .errors import DataError, ParseError, SchemaError, SdmkitError
from .geo import (
    BoundingBox,
    GeoPoint,
    Raster,
    dump_ascii_grid,
    haversine_km,
    parse_ascii_grid,
    sample,
)
from .mapping import PredictionGrid, predict_grid, write_grid_csv, write_heatmap_pgm
from .metrics import (
    ConfusionMatrix,
    MetricsReport,
    auc_roc,
    classification_report,
    confusion,
    report_to_dict,
)
from .pipeline import (
    FEATURE_NAMES,
    Dataset,
    ObservationRecord,
    Sample,
    SplitDataset,
    assemble_dataset,
    balanced_sample,
    generate_pseudo_absences,
    parse_observations_csv,
    presence_bounding_box,
    read_dataset_csv,
    split_dataset,
    synthetic_clusters,
    write_dataset_csv,
)
from .tree import (
    Internal,
    Leaf,
    TreeConfig,
    best_split,
    gini,
    predict_tree,
    predict_tree_batch,
    train_decision_tree,
)

__version__ = "0.1.0"

__all__ = [
    "BoundingBox",
    "ConfusionMatrix",
    "DataError",
    "Dataset",
    "FEATURE_NAMES",
    "GeoPoint",
    "GradientBoosting",
    "Internal",
    "Leaf",
    "MetricsReport",
    "ObservationRecord",
    "ParseError",
    "PredictionGrid",
    "RandomForest",
    "Raster",
    "Sample",
    "SchemaError",
    "SdmkitError",
    "SplitDataset",
    "TreeConfig",
    "assemble_dataset",
    "auc_roc",
    "balanced_sample",
    "best_split",
    "classification_report",
    "confusion",
    "dump_ascii_grid",
    "feature_importance",
    "generate_pseudo_absences",
    "gini",
    "haversine_km",
    "load_model",
    "model_from_dict",
    "model_to_dict",
    "parse_ascii_grid",
    "parse_observations_csv",
    "predict_gbt",
    "predict_grid",
    "predict_random_forest",
    "predict_tree",
    "predict_tree_batch",
    "presence_bounding_box",
    "read_dataset_csv",
    "report_to_dict",
    "sample",
    "save_model",
    "split_dataset",
    "synthetic_clusters",
    "train_decision_tree",
    "write_dataset_csv",
    "write_grid_csv",
    "write_heatmap_pgm",
]
