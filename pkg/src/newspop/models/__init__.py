"""Regression and classification model suite."""

from .regression import (
    FitStats,
    KnnConfig,
    KnnModel,
    RegressionModel,
    feature_matrix,
    fit_regression,
    knn_predict,
    predict_regression,
    predict_regression_batch,
)
from .classifiers import (
    ClassScheme,
    ClassifierModel,
    DEFAULT_SCHEME,
    Standardizer,
    assign_class,
    fit_classifier,
)
from .validation import (
    CvReport,
    DEFAULT_FEATURE_GROUPS,
    ablate_features,
    cross_validate,
    fit_zero_tweet,
    stratified_folds,
    zero_tweet_label,
)
from ..metrics import r_squared

__all__ = [
    "FitStats",
    "KnnConfig",
    "KnnModel",
    "RegressionModel",
    "feature_matrix",
    "fit_regression",
    "knn_predict",
    "predict_regression",
    "predict_regression_batch",
    "ClassScheme",
    "ClassifierModel",
    "DEFAULT_SCHEME",
    "Standardizer",
    "assign_class",
    "fit_classifier",
    "CvReport",
    "DEFAULT_FEATURE_GROUPS",
    "ablate_features",
    "cross_validate",
    "fit_zero_tweet",
    "stratified_folds",
    "zero_tweet_label",
    "r_squared",
]
