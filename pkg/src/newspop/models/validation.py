"""Stratified cross-validation, feature ablation, and zero-tweet prediction."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from ..errors import DataError
from ..metrics import accuracy, confusion_matrix
from ..scoring import FeatureVector
from .classifiers import ClassifierModel, fit_classifier

ZERO = "zero"
NONZERO = "nonzero"

# group name -> feature indices into FEATURE_NAMES order
DEFAULT_FEATURE_GROUPS: tuple[tuple[str, tuple[int, ...]], ...] = (
    ("source", (0,)),
    ("category", (1,)),
    ("subjectivity", (2,)),
    ("entities", (3, 4, 5)),
)


@dataclass
class CvReport:
    fold_accuracies: list[float]
    pooled_accuracy: float
    confusion: dict[str, dict[str, int]]
    classes: list[str]
    n: int
    warnings: list[str] = field(default_factory=list)


def stratified_folds(labels: Sequence[str], k: int, seed: int = 0) -> np.ndarray:
    """Seeded stratified fold assignment; per-class counts differ by at most 1.

    Classes with fewer than k members get a warning via the report path;
    their samples are still dealt round-robin.
    """
    n = len(labels)
    if k < 2:
        raise DataError(f"k must be >= 2, got {k}")
    if n < k:
        raise DataError(f"need at least k={k} samples, got {n}")
    rng = np.random.default_rng(seed)
    folds = np.empty(n, dtype=int)
    cursor = 0  # continues across classes so fold sizes stay balanced
    for cls in sorted(set(labels)):
        idx = np.array([i for i, lab in enumerate(labels) if lab == cls])
        idx = idx[rng.permutation(len(idx))]
        folds[idx] = (cursor + np.arange(len(idx))) % k
        cursor = (cursor + len(idx)) % k
    return folds


def cross_validate(
    data: Sequence[tuple[FeatureVector, str]],
    algorithm: str,
    params: Optional[dict] = None,
    k: int = 10,
    seed: int = 0,
    feature_indices: Optional[Sequence[int]] = None,
    log_scores: bool = False,
) -> CvReport:
    """k-fold stratified CV; every sample is tested exactly once."""
    labels = [label for _, label in data]
    classes = sorted(set(labels))
    warnings = [
        f"class {cls!r} has fewer members than k={k}; stratification relaxed"
        for cls in classes
        if labels.count(cls) < k
    ]
    folds = stratified_folds(labels, k, seed)

    predictions: list[Optional[str]] = [None] * len(data)
    fold_accuracies = []
    for f in range(k):
        train = [data[i] for i in range(len(data)) if folds[i] != f]
        test_idx = [i for i in range(len(data)) if folds[i] == f]
        if not test_idx:
            warnings.append(f"fold {f} is empty")
            continue
        model = fit_classifier(
            train,
            algorithm,
            params,
            seed=seed,
            feature_indices=feature_indices,
            log_scores=log_scores,
        )
        preds = model.predict([data[i][0] for i in test_idx])
        for i, pred in zip(test_idx, preds):
            predictions[i] = pred
        fold_accuracies.append(accuracy(preds, [labels[i] for i in test_idx]))

    return CvReport(
        fold_accuracies=fold_accuracies,
        pooled_accuracy=accuracy(predictions, labels),
        confusion=confusion_matrix(predictions, labels, classes),
        classes=classes,
        n=len(data),
        warnings=warnings,
    )


def ablate_features(
    data: Sequence[tuple[FeatureVector, str]],
    algorithm: str,
    params: Optional[dict] = None,
    groups: Sequence[tuple[str, tuple[int, ...]]] = DEFAULT_FEATURE_GROUPS,
    k: int = 10,
    seed: int = 0,
) -> list[tuple[str, float]]:
    """Leave-one-group-out ablation: baseline plus one CV run per omitted group."""
    covered = sorted(i for _, idxs in groups for i in idxs)
    if covered != sorted(set(covered)):
        raise DataError("ablation groups overlap")
    all_indices = tuple(covered)
    rows = [
        (
            "all",
            cross_validate(
                data, algorithm, params, k, seed, feature_indices=all_indices
            ).pooled_accuracy,
        )
    ]
    for name, idxs in groups:
        kept = tuple(i for i in all_indices if i not in idxs)
        report = cross_validate(
            data, algorithm, params, k, seed, feature_indices=kept
        )
        rows.append((f"-{name}", report.pooled_accuracy))
    return rows


def zero_tweet_label(tweets: int) -> str:
    return ZERO if tweets == 0 else NONZERO


def fit_zero_tweet(
    data: Sequence[tuple[FeatureVector, int]],
    algorithm: str,
    params: Optional[dict] = None,
    seed: int = 0,
) -> ClassifierModel:
    """Binary model: will the article be mentioned at all?"""
    labeled = [(fv, zero_tweet_label(t)) for fv, t in data]
    present = {label for _, label in labeled}
    if present != {ZERO, NONZERO}:
        raise DataError(
            "zero-tweet training needs both zero and nonzero examples, "
            f"got only {sorted(present)}"
        )
    return fit_classifier(labeled, algorithm, params, seed=seed)
