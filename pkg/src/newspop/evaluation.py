"""Held-out evaluation, tweet-count distribution emission, and external
ratings comparison.
"""

from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import dataclass, field, asdict
from typing import Optional, Sequence

import numpy as np

from .corpus import Article, SourceAggregate, normalize_key
from .errors import DataError
from .metrics import accuracy, confusion_matrix, mse, pearson, r_squared
from .models.classifiers import ClassifierModel
from .models.regression import (
    RegressionModel,
    KnnModel,
    pairs_fingerprint,
    predict_regression_batch,
)
from .scoring import FeatureVector

REPORT_VERSION = 1


@dataclass
class EvalReport:
    r_squared_log_space: Optional[float] = None
    r_squared_raw: Optional[float] = None
    mse_raw: Optional[float] = None
    accuracy: Optional[float] = None
    confusion: Optional[dict[str, dict[str, int]]] = None
    ablation: Optional[dict[str, float]] = None
    window_sweep: Optional[list[tuple[int, float]]] = None
    notes: list[str] = field(default_factory=list)

    def to_record(self) -> dict:
        rec = asdict(self)
        rec["version"] = REPORT_VERSION
        return rec

    @classmethod
    def from_record(cls, rec: dict) -> "EvalReport":
        rec = dict(rec)
        rec.pop("version", None)
        if rec.get("window_sweep") is not None:
            rec["window_sweep"] = [(int(w), float(r)) for w, r in rec["window_sweep"]]
        return cls(**rec)


def _check_leakage(train_fingerprint: str, test_pairs) -> None:
    if train_fingerprint and train_fingerprint == pairs_fingerprint(test_pairs):
        raise DataError("leakage: test set is identical to the training set")


def evaluate(model, test: Sequence[tuple[FeatureVector, object]]) -> EvalReport:
    """Score a fitted model on held-out pairs.

    Regression models report R-squared in log and raw space; classifiers
    report accuracy and a confusion matrix.
    """
    if not test:
        raise DataError("empty test set")
    report = EvalReport()

    if isinstance(model, (RegressionModel, KnnModel)):
        _check_leakage(model.train_fingerprint, test)
        actual = np.array([t for _, t in test], dtype=float)
        if isinstance(model, KnnModel):
            preds = np.array([model.predict(fv) for fv, _ in test])
            report.notes.append(f"knn k={model.k}")
        else:
            preds = predict_regression_batch(model, [fv for fv, _ in test])
            report.notes.append(f"regression form={model.form}")
        report.r_squared_raw = r_squared(preds, actual)
        report.mse_raw = mse(preds, actual)
        if np.all(preds > 0) and np.all(actual > 0):
            report.r_squared_log_space = r_squared(np.log(preds), np.log(actual))
        else:
            report.notes.append("log-space R^2 skipped: nonpositive values")
        report.notes.append(f"train_fingerprint={model.train_fingerprint}")
        return report

    if isinstance(model, ClassifierModel):
        _check_leakage(model.train_fingerprint, test)
        labels = [label for _, label in test]
        preds = model.predict([fv for fv, _ in test])
        classes = sorted(set(labels) | set(model.classes))
        report.accuracy = accuracy(preds, labels)
        report.confusion = confusion_matrix(preds, labels, classes)
        report.notes.append(f"classifier algorithm={model.algorithm}")
        report.notes.append(f"train_fingerprint={model.train_fingerprint}")
        return report

    raise DataError(f"cannot evaluate model of type {type(model).__name__}")


@dataclass
class DistributionReport:
    """Log-binned tweet-count distribution.

    points holds (log10 bin lower edge, log10 of count per distinct
    integer value in the bin); the per-value normalization makes the
    least-squares slope of the points estimate the tail exponent.
    Zero-tweet articles sit outside the log bins in zero_count.
    """

    bin_log10: list[float]
    counts: list[int]
    zero_count: int
    bin_width: float

    @property
    def points(self) -> list[tuple[float, float]]:
        out = []
        for edge, count in zip(self.bin_log10, self.counts):
            width = _integers_in_bin(edge, self.bin_width)
            out.append((edge, math.log10(count / width)))
        return out

    def slope(self) -> float:
        pts = self.points
        if len(pts) < 2:
            raise DataError("need at least 2 bins to fit a slope")
        x = np.array([p[0] for p in pts])
        y = np.array([p[1] for p in pts])
        return float(np.polyfit(x, y, 1)[0])


def _bin_index(tweets: int, width: float) -> int:
    return int(math.floor(math.log10(tweets) / width))


def _integers_in_bin(edge_log10: float, width: float) -> int:
    """Count of integer tweet values whose log bin starts at edge_log10."""
    b = round(edge_log10 / width)
    lo = 10.0 ** (b * width)
    hi = 10.0 ** ((b + 1) * width)
    lo_int = math.ceil(lo)
    hi_int = math.floor(hi)
    # nudge endpoints that float rounding put in the wrong bin
    while lo_int <= hi_int and _bin_index(lo_int, width) != b:
        lo_int += 1
    while hi_int >= lo_int and _bin_index(hi_int, width) != b:
        hi_int -= 1
    return max(hi_int - lo_int + 1, 1)


def emit_distribution(
    articles: Sequence[Article], bin_width: float = 0.1
) -> DistributionReport:
    """Log-log tweet distribution with zero-tweet articles side-channeled."""
    if bin_width <= 0:
        raise DataError(f"bin width must be positive, got {bin_width}")
    zero_count = 0
    counts: dict[int, int] = {}
    for art in articles:
        if art.tweets is None:
            raise DataError(f"article {art.id} has no tweets label")
        if art.tweets == 0:
            zero_count += 1
            continue
        b = _bin_index(art.tweets, bin_width)
        counts[b] = counts.get(b, 0) + 1
    bins = sorted(counts)
    return DistributionReport(
        bin_log10=[b * bin_width for b in bins],
        counts=[counts[b] for b in bins],
        zero_count=zero_count,
        bin_width=bin_width,
    )


@dataclass(frozen=True)
class ExternalRating:
    source: str
    rating: float


def parse_ratings(path) -> list[ExternalRating]:
    """Read a ratings TSV: source<TAB>rating per line."""
    ratings = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise DataError(f"bad ratings line {lineno}: expected source<TAB>rating")
            ratings.append(ExternalRating(normalize_key(parts[0]), float(parts[1])))
    return ratings


@dataclass
class RatingsComparison:
    links_correlation: float
    tweets_correlation: float
    t_density_correlation: float
    overlap: int


def compare_ratings(
    ratings: Sequence[ExternalRating],
    aggregates: dict[str, SourceAggregate],
) -> RatingsComparison:
    """Correlate external source ratings with dataset performance."""
    norm_aggregates = {normalize_key(k): v for k, v in aggregates.items()}
    common = sorted(
        {normalize_key(r.source) for r in ratings}
        & {k for k, agg in norm_aggregates.items() if agg.links > 0}
    )
    if len(common) < 3:
        raise DataError(f"only {len(common)} sources overlap; need at least 3")
    by_source = {normalize_key(r.source): r.rating for r in ratings}
    rating_v = [by_source[k] for k in common]
    links_v = [float(norm_aggregates[k].links) for k in common]
    tweets_v = [float(norm_aggregates[k].tweets) for k in common]
    density_v = [norm_aggregates[k].t_density for k in common]
    return RatingsComparison(
        links_correlation=pearson(rating_v, links_v),
        tweets_correlation=pearson(rating_v, tweets_v),
        t_density_correlation=pearson(rating_v, density_v),
        overlap=len(common),
    )


def emit_report(report: EvalReport, path, format: str = "json") -> list[str]:
    """Write a report as canonical JSON or a CSV bundle. Bit-stable."""
    if format == "json":
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(report.to_record(), fh, sort_keys=True, indent=2)
            fh.write("\n")
        return [str(path)]
    if format != "csv-bundle":
        raise DataError(f"unknown report format {format!r}")

    os.makedirs(path, exist_ok=True)
    written = []

    def _write(name: str, header: list[str], rows: list[list]) -> None:
        file_path = os.path.join(path, name)
        with open(file_path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            writer.writerows(rows)
        written.append(file_path)

    scalars = [
        [name, "" if value is None else repr(value)]
        for name, value in (
            ("r_squared_log_space", report.r_squared_log_space),
            ("r_squared_raw", report.r_squared_raw),
            ("mse_raw", report.mse_raw),
            ("accuracy", report.accuracy),
        )
    ]
    _write("summary.csv", ["metric", "value"], scalars)
    if report.confusion is not None:
        classes = sorted(report.confusion)
        rows = [[a] + [report.confusion[a][p] for p in classes] for a in classes]
        _write("confusion.csv", ["actual"] + classes, rows)
    if report.ablation is not None:
        _write(
            "ablation.csv",
            ["omitted_group", "accuracy"],
            [[g, repr(a)] for g, a in report.ablation.items()],
        )
    if report.window_sweep is not None:
        _write(
            "window_sweep.csv",
            ["window_days", "correlation"],
            [[w, repr(r)] for w, r in report.window_sweep],
        )
    _write("notes.csv", ["note"], [[n] for n in report.notes])
    return written
