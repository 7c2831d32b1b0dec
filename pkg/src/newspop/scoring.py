"""t-density score tables and feature vector assembly.

t-density is tweets per link: the average number of tweets received per
article published, by a source, category, or named entity. Source scores
come from a trailing history window, smoothed with an exponential moving
average and optionally weighted by how consistently the source stays
above the mean t-density. Unseen sources and categories fall back to the
table's global mean; unknown entities contribute score 0.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from datetime import date, timedelta
from typing import Iterable, Optional, Sequence

from .corpus import Article, HistoryRecord, normalize_key
from .errors import DataError
from .textfeat import Gazetteer, SubjectivityModel, classify_subjectivity, extract_entities

SCORE_TABLE_VERSION = 1
TABLE_KINDS = ("source", "category", "entity")

DEFAULT_ENTITY_WINDOW_DAYS = 30


@dataclass
class ScoringConfig:
    window_days: int = 54
    ema_alpha: float = 0.3
    consistency_weighting: bool = True
    log_transform_scores: bool = True

    def __post_init__(self):
        if self.window_days <= 0:
            raise DataError(f"window_days must be positive, got {self.window_days}")
        if not 0.0 < self.ema_alpha <= 1.0:
            raise DataError(f"ema_alpha must be in (0, 1], got {self.ema_alpha}")


@dataclass
class ScoreTable:
    kind: str
    scores: dict[str, float]
    global_mean: float
    built_from: str = ""

    def lookup(self, key: str) -> float:
        """Score for a key, falling back to the global mean when unseen."""
        return self.scores.get(normalize_key(key), self.global_mean)

    def to_record(self) -> dict:
        return {
            "version": SCORE_TABLE_VERSION,
            "kind": self.kind,
            "built_from": self.built_from,
            "global_mean": self.global_mean,
            "scores": {k: self.scores[k] for k in sorted(self.scores)},
        }

    @classmethod
    def from_record(cls, rec: dict) -> "ScoreTable":
        if rec.get("version") != SCORE_TABLE_VERSION:
            raise DataError(f"unsupported score table version {rec.get('version')!r}")
        if rec.get("kind") not in TABLE_KINDS:
            raise DataError(f"unknown score table kind {rec.get('kind')!r}")
        return cls(
            kind=rec["kind"],
            scores=dict(rec["scores"]),
            global_mean=rec["global_mean"],
            built_from=rec.get("built_from", ""),
        )

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_record(), fh, sort_keys=True, indent=2)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "ScoreTable":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_record(json.load(fh))


def t_density(links: int, tweets: int) -> float:
    """Tweets per link. Undefined when there are no links."""
    if links < 0 or tweets < 0:
        raise DataError(f"negative counts: links={links}, tweets={tweets}")
    if links == 0:
        raise DataError("undefined t-density: links = 0")
    return tweets / links


def build_category_scores(scoring_set: Sequence[Article]) -> ScoreTable:
    """Per-category t-density over the score-assignment partition."""
    if not scoring_set:
        raise DataError("cannot build category scores from an empty scoring set")
    links: dict[str, int] = {}
    tweets: dict[str, int] = {}
    total_tweets = 0
    for art in scoring_set:
        if art.tweets is None:
            raise DataError(f"article {art.id} has no tweets label")
        key = normalize_key(art.category)
        links[key] = links.get(key, 0) + 1
        tweets[key] = tweets.get(key, 0) + art.tweets
        total_tweets += art.tweets
    scores = {key: tweets[key] / links[key] for key in links}
    return ScoreTable(
        kind="category",
        scores=scores,
        global_mean=total_tweets / len(scoring_set),
        built_from=f"scoring set of {len(scoring_set)} articles",
    )


def _window_records(
    history: Iterable[HistoryRecord], window_days: int, as_of: date
) -> dict[str, list[HistoryRecord]]:
    start = as_of - timedelta(days=window_days)
    per_key: dict[str, list[HistoryRecord]] = {}
    for rec in history:
        if rec.date >= as_of:
            raise DataError(
                f"history record for {rec.key!r} on {rec.date} is not before as_of {as_of}"
            )
        if rec.date >= start:
            per_key.setdefault(normalize_key(rec.key), []).append(rec)
    for records in per_key.values():
        records.sort(key=lambda r: r.date)
    return per_key


def plain_window_density(
    history: Iterable[HistoryRecord], window_days: int, as_of: date
) -> dict[str, float]:
    """Aggregate window t-density per key: total tweets over total links.

    Keys with no links in the window are omitted.
    """
    out: dict[str, float] = {}
    for key, records in _window_records(history, window_days, as_of).items():
        links = sum(r.links for r in records)
        tweets = sum(r.tweets for r in records)
        if links > 0:
            out[key] = tweets / links
    return out


def _daily_series(records: list[HistoryRecord]) -> list[float]:
    # days with links = 0 have undefined t-density and are skipped
    return [r.tweets / r.links for r in records if r.links > 0]


def _ema(series: Sequence[float], alpha: float) -> float:
    value = series[0]
    for x in series[1:]:
        value = alpha * x + (1.0 - alpha) * value
    return value


def build_source_scores(
    history: Iterable[HistoryRecord],
    cfg: Optional[ScoringConfig] = None,
    as_of: Optional[date] = None,
) -> ScoreTable:
    """Smoothed, consistency-weighted source t-density over a trailing window.

    Per source: the daily t-density series (days with links > 0) is run
    through a first-order EMA; the final value is the base score. With
    consistency weighting on, the base is multiplied by the fraction of
    defined days whose raw t-density exceeds the global mean. The global
    mean is the mean of per-source plain window t-densities.
    """
    cfg = cfg or ScoringConfig()
    if as_of is None:
        raise DataError("build_source_scores requires an as_of date")
    per_source = _window_records(history, cfg.window_days, as_of)

    series: dict[str, list[float]] = {}
    window_density: dict[str, float] = {}
    for key, records in per_source.items():
        daily = _daily_series(records)
        if not daily:
            continue  # no defined day in the window: source omitted
        series[key] = daily
        links = sum(r.links for r in records)
        tweets = sum(r.tweets for r in records)
        window_density[key] = tweets / links

    if not series:
        raise DataError("no source has a defined t-density in the window")
    global_mean = sum(window_density.values()) / len(window_density)

    scores: dict[str, float] = {}
    for key, daily in series.items():
        base = _ema(daily, cfg.ema_alpha)
        if cfg.consistency_weighting:
            above = sum(1 for x in daily if x > global_mean)
            base = base * (above / len(daily))
        scores[key] = base

    start = as_of - timedelta(days=cfg.window_days)
    return ScoreTable(
        kind="source",
        scores=scores,
        global_mean=global_mean,
        built_from=(
            f"history [{start.isoformat()}, {as_of.isoformat()}), "
            f"window={cfg.window_days}d, alpha={cfg.ema_alpha}, "
            f"weighting={'on' if cfg.consistency_weighting else 'off'}"
        ),
    )


def build_entity_scores(
    history: Iterable[HistoryRecord],
    cfg: Optional[ScoringConfig] = None,
    as_of: Optional[date] = None,
) -> ScoreTable:
    """Entity t-density over a trailing window (default 30 days).

    Plain window aggregation: no smoothing, no consistency weighting.
    """
    if as_of is None:
        raise DataError("build_entity_scores requires an as_of date")
    window_days = cfg.window_days if cfg is not None else DEFAULT_ENTITY_WINDOW_DAYS
    density = plain_window_density(history, window_days, as_of)
    if not density:
        raise DataError("no entity has a defined t-density in the window")
    start = as_of - timedelta(days=window_days)
    return ScoreTable(
        kind="entity",
        scores=density,
        global_mean=sum(density.values()) / len(density),
        built_from=f"history [{start.isoformat()}, {as_of.isoformat()}), window={window_days}d",
    )


def sweep_history_window(
    history: Iterable[HistoryRecord],
    labels: dict[str, float],
    windows: Sequence[int],
    as_of: Optional[date] = None,
) -> list[tuple[int, float]]:
    """Correlation of window t-density scores against label t-densities.

    One (window, Pearson r) point per window, computed over the sources
    common to the window and the labels. Uses the unsmoothed window
    aggregate, so the window length is the only moving part.
    """
    from .metrics import pearson

    if as_of is None:
        raise DataError("sweep_history_window requires an as_of date")
    if list(windows) != sorted(windows):
        raise DataError("windows must be sorted ascending")
    history = list(history)
    norm_labels = {normalize_key(k): v for k, v in labels.items()}
    points: list[tuple[int, float]] = []
    for window in windows:
        density = plain_window_density(history, window, as_of)
        common = sorted(set(density) & set(norm_labels))
        if len(common) < 3:
            raise DataError(
                f"window {window}: only {len(common)} sources common to history and labels"
            )
        r = pearson([density[k] for k in common], [norm_labels[k] for k in common])
        points.append((window, r))
    return points


FEATURE_NAMES = ("S", "C", "Subj", "Ent_ct", "Ent_max", "Ent_avg")


@dataclass(frozen=True)
class FeatureVector:
    S: float
    C: float
    Subj: int
    Ent_ct: int
    Ent_max: float
    Ent_avg: float

    def __post_init__(self):
        if self.Ent_ct == 0 and (self.Ent_max != 0.0 or self.Ent_avg != 0.0):
            raise DataError("entity aggregates must be 0 when no entities are present")
        if self.Ent_ct >= 1 and self.Ent_max < self.Ent_avg:
            raise DataError("Ent_max cannot be below Ent_avg")

    def as_tuple(self) -> tuple[float, float, int, int, float, float]:
        return (self.S, self.C, self.Subj, self.Ent_ct, self.Ent_max, self.Ent_avg)

    def to_record(self) -> dict:
        return {name: value for name, value in zip(FEATURE_NAMES, self.as_tuple())}

    @classmethod
    def from_record(cls, rec: dict) -> "FeatureVector":
        return cls(*(rec[name] for name in FEATURE_NAMES))


def assemble_features(
    article: Article,
    source_table: ScoreTable,
    category_table: ScoreTable,
    entity_table: ScoreTable,
    subjectivity: SubjectivityModel,
    gazetteer: Gazetteer,
) -> FeatureVector:
    """Build the six model inputs for one article.

    Source and category fall back to their table's global mean when
    unseen; entities found in the text but missing from the entity table
    still count toward Ent_ct, with score 0.
    """
    text = article.title + " " + article.summary
    entities = extract_entities(text, gazetteer)
    ent_scores = [entity_table.scores.get(ent, 0.0) for ent in entities]
    if ent_scores:
        ent_max = max(ent_scores)
        # min() guards against float summation overshooting the max
        ent_avg = min(sum(ent_scores) / len(ent_scores), ent_max)
    else:
        ent_max = 0.0
        ent_avg = 0.0
    return FeatureVector(
        S=source_table.lookup(article.source),
        C=category_table.lookup(article.category),
        Subj=classify_subjectivity(subjectivity, text),
        Ent_ct=len(entities),
        Ent_max=ent_max,
        Ent_avg=ent_avg,
    )


@dataclass
class FeatureStage:
    """Everything needed to turn an article into a FeatureVector."""

    source_table: ScoreTable
    category_table: ScoreTable
    entity_table: ScoreTable
    subjectivity: SubjectivityModel
    gazetteer: Gazetteer

    def assemble(self, article: Article) -> FeatureVector:
        return assemble_features(
            article,
            self.source_table,
            self.category_table,
            self.entity_table,
            self.subjectivity,
            self.gazetteer,
        )
