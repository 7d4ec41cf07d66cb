from .metrics import (
    ConfusionMatrix,
    MetricsReport,
    evaluate,
    headline,
    mcc,
    precision,
    recall,
    report_from_matrix,
)
from .forest import (
    Forest,
    ForestConfig,
    LabeledSample,
    Tree,
    load_forest,
    predict,
    read_predictions,
    save_forest,
    train_forest,
    train_on_arrays,
    write_predictions,
)
from .crossval import CrossValReport, FoldReport, cross_validate, grouped_folds

__all__ = [
    "ConfusionMatrix",
    "MetricsReport",
    "evaluate",
    "headline",
    "precision",
    "recall",
    "mcc",
    "report_from_matrix",
    "Forest",
    "ForestConfig",
    "LabeledSample",
    "Tree",
    "train_forest",
    "train_on_arrays",
    "predict",
    "save_forest",
    "load_forest",
    "write_predictions",
    "read_predictions",
    "grouped_folds",
    "cross_validate",
    "FoldReport",
    "CrossValReport",
]
