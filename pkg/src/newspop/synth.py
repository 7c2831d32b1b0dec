"""Seeded synthetic corpora and histories with planted ground truth.

Every dataset-dependent claim in the test suite is verified against data
generated here, where the true structure is known and recorded.

Randomness: numpy's default PCG64 generator throughout. The master seed
is split into named child streams (one per logical table) via
SeedSequence.spawn, so each output is stable under changes elsewhere.
Reruns with the same config are byte-identical.

The file generator plants a corpus whose labels are computed from the
*realized* score tables (the same functions the pipeline runs), so a
downstream ingest/build-scores/train run closes the loop exactly: with
zero label noise, fitting the log-linear form on the generated corpus
recovers the planted coefficients to float precision.
"""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, field
from datetime import date, datetime, timedelta, timezone
from typing import Optional, Sequence

import numpy as np

from .corpus import Article, HistoryRecord, write_articles, write_history
from .errors import DataError
from .models.classifiers import ClassScheme, DEFAULT_SCHEME, assign_class
from .scoring import (
    FeatureVector,
    ScoringConfig,
    build_category_scores,
    build_entity_scores,
    build_source_scores,
)
from .textfeat import Gazetteer, write_gazetteer

DEFAULT_COEFFICIENTS = {
    "b_S": 1.24,
    "b_C": 0.45,
    "b_Entmax": 0.1,
    "intercept": -3.0,
}

GROUND_TRUTH_VERSION = 1

LABEL_MODELS = ("planted_regression", "power_law")

_SUBJ_MARKERS = ("awful", "terrible", "outrageous", "shocking", "disgraceful")
_OBJ_MARKERS = ("reported", "stated", "announced", "confirmed", "released")
_TITLE_FILLERS = (
    "midday", "roundup", "dispatch", "bulletin", "digest", "wire",
    "weekly", "daily", "briefs", "update", "edition", "desk",
)
_SUMMARY_FILLERS = (
    "coverage", "continues", "overview", "recap", "readers", "follow",
    "developments", "stories", "morning", "evening", "today", "tomorrow",
)
_CATEGORY_POOL = (
    "technology", "health", "sports", "business", "entertainment", "politics",
    "science", "travel", "gaming", "music", "world", "usa", "lifestyle",
    "finance", "art", "food", "education", "environment", "autos", "law",
    "media", "religion", "jobs", "events",
)
_ENTITY_KIND_CYCLE = ("person", "place", "organization")

_SPAM_HOST = "spamfarm.example"


@dataclass
class SynthConfig:
    seed: int = 0
    n_articles: int = 10_000
    n_sources: int = 100
    n_categories: int = 12
    n_entities: int = 60
    as_of: date = date(2011, 8, 8)
    publish_days: int = 7

    # source history: lognormal per-source t-density rates; the defaults
    # put median tweet counts near 8 with a long tail into the hundreds
    source_rate_log_mu: float = 3.0
    source_rate_log_sigma: float = 1.2
    links_per_day: int = 20
    history_days: int = 90
    history_noise: bool = False  # Poisson daily links/tweets instead of constants

    entity_rate_log_mu: float = 1.0
    entity_rate_log_sigma: float = 0.6
    entity_links_per_day: int = 5

    # category prior spread (lognormal multipliers on scoring-set labels)
    category_log_mu: float = 3.0
    category_log_sigma: float = 0.7

    # labels
    label_model: str = "planted_regression"
    coefficients: dict[str, float] = field(
        default_factory=lambda: dict(DEFAULT_COEFFICIENTS)
    )
    label_noise_sigma: float = 0.0
    tail_exponent: float = -2.0  # power_law label model
    tail_max: int = 2400
    zero_fraction: float = 0.0  # power_law label model: iid zero-tweet share

    # zero-tweet rule (planted_regression mode): zero iff S < threshold
    zero_threshold: float = 0.0  # 0 disables
    zero_noise: float = 0.0  # rule flip probability

    spam_fraction: float = 0.0
    subjectivity_null: bool = True

    # scoring realization; the downstream build-scores run must match these
    window_days: int = 54
    ema_alpha: float = 0.3
    consistency_weighting: bool = False
    ratio: tuple[float, float, float] = (0.5, 0.25, 0.25)

    def validate(self) -> None:
        if min(self.n_articles, self.n_sources, self.n_categories, self.n_entities) < 1:
            raise DataError("all counts must be positive")
        if self.n_sources > self.n_articles:
            raise DataError("infeasible config: more sources than articles")
        if self.label_model not in LABEL_MODELS:
            raise DataError(f"unknown label model {self.label_model!r}")
        if self.tail_exponent >= -1:
            raise DataError(f"tail exponent must be < -1, got {self.tail_exponent}")
        if not 0.0 <= self.zero_noise <= 0.5:
            raise DataError(f"zero-rule noise must be in [0, 0.5], got {self.zero_noise}")
        if not 0.0 <= self.spam_fraction < 0.5:
            raise DataError(f"spam fraction must be in [0, 0.5), got {self.spam_fraction}")
        if self.history_days < self.window_days:
            raise DataError("history must cover the scoring window")

    def to_record(self) -> dict:
        rec = asdict(self)
        rec["as_of"] = self.as_of.isoformat()
        rec["ratio"] = list(self.ratio)
        return rec

    @classmethod
    def from_record(cls, rec: dict) -> "SynthConfig":
        rec = dict(rec)
        if "as_of" in rec and isinstance(rec["as_of"], str):
            rec["as_of"] = date.fromisoformat(rec["as_of"])
        if "ratio" in rec:
            rec["ratio"] = tuple(rec["ratio"])
        return cls(**rec)


_STREAMS = (
    "sources", "categories", "entities", "articles",
    "labels", "zero", "spam", "subjectivity", "history",
)


def _streams(seed: int) -> dict[str, np.random.Generator]:
    children = np.random.SeedSequence(seed).spawn(len(_STREAMS))
    return {name: np.random.default_rng(ss) for name, ss in zip(_STREAMS, children)}


def _clipped_lognormal(rng, mu: float, sigma: float, n: int) -> np.ndarray:
    z = np.clip(rng.standard_normal(n), -3.5, 3.5)
    return np.exp(mu + sigma * z)


def sample_power_law(
    rng: np.random.Generator, n: int, exponent: float, t_max: int
) -> np.ndarray:
    """Integer draws in [1, t_max] with pmf proportional to t^exponent."""
    t = np.arange(1, t_max + 1, dtype=float)
    pmf = t**exponent
    cdf = np.cumsum(pmf)
    cdf /= cdf[-1]
    return 1 + np.searchsorted(cdf, rng.random(n), side="left")


def _source_history(
    cfg: SynthConfig, rng, names: Sequence[str], rates: np.ndarray
) -> list[HistoryRecord]:
    records = []
    start = cfg.as_of - timedelta(days=cfg.history_days)
    for offset in range(cfg.history_days):
        day = start + timedelta(days=offset)
        for name, rate in zip(names, rates):
            if cfg.history_noise:
                links = int(rng.poisson(cfg.links_per_day))
                tweets = int(rng.poisson(rate * links)) if links > 0 else 0
            else:
                links = cfg.links_per_day
                tweets = max(1, round(rate * links))
            records.append(HistoryRecord(day, name, links, tweets, "source"))
    return records


def _entity_history(
    cfg: SynthConfig, rng, names: Sequence[str], rates: np.ndarray
) -> list[HistoryRecord]:
    records = []
    start = cfg.as_of - timedelta(days=cfg.history_days)
    for offset in range(cfg.history_days):
        day = start + timedelta(days=offset)
        for name, rate in zip(names, rates):
            if cfg.history_noise:
                links = int(rng.poisson(cfg.entity_links_per_day))
                tweets = int(rng.poisson(rate * links)) if links > 0 else 0
            else:
                links = cfg.entity_links_per_day
                tweets = max(1, round(rate * links))
            records.append(HistoryRecord(day, name, links, tweets, "entity"))
    return records


@dataclass
class _ArticleSpec:
    published_at: datetime
    source: str
    category: str
    entities: list[str]
    subjective: bool
    tweets: Optional[int] = None
    spam_kind: Optional[str] = None  # duplicate | short_title | blocked_host
    dup_target: Optional[int] = None  # index into the base spec list


def _make_title(spec: _ArticleSpec, rng) -> tuple[str, str]:
    markers = _SUBJ_MARKERS if spec.subjective else _OBJ_MARKERS
    t_fill = [str(w) for w in rng.choice(_TITLE_FILLERS, size=2)]
    t_mark = [str(w) for w in rng.choice(markers, size=2)]
    ent_words = [e.capitalize() for e in spec.entities]
    title = " ".join(t_fill + t_mark + ent_words)
    s_fill = [str(w) for w in rng.choice(_SUMMARY_FILLERS, size=4)]
    s_mark = [str(w) for w in rng.choice(markers, size=2)]
    summary = " ".join(s_fill + s_mark)
    return title, summary


def generate(cfg: SynthConfig, out_dir) -> dict:
    """Write articles.jsonl, history.jsonl, ground_truth.json, gazetteer.tsv.

    Returns the ground-truth dict. Deterministic for a fixed config.
    """
    cfg.validate()
    rngs = _streams(cfg.seed)
    os.makedirs(out_dir, exist_ok=True)

    # planted sources and their history
    source_names = [f"source{i:03d}" for i in range(cfg.n_sources)]
    source_rates = _clipped_lognormal(
        rngs["sources"], cfg.source_rate_log_mu, cfg.source_rate_log_sigma, cfg.n_sources
    )
    history = _source_history(cfg, rngs["history"], source_names, source_rates)

    # planted entities and their history
    entity_names = [f"ent{i:04d}" for i in range(cfg.n_entities)]
    entity_kinds = {
        name: _ENTITY_KIND_CYCLE[i % len(_ENTITY_KIND_CYCLE)]
        for i, name in enumerate(entity_names)
    }
    entity_rates = _clipped_lognormal(
        rngs["entities"], cfg.entity_rate_log_mu, cfg.entity_rate_log_sigma, cfg.n_entities
    )
    history += _entity_history(cfg, rngs["history"], entity_names, entity_rates)

    # realize the tables exactly as the pipeline will
    scoring_cfg = ScoringConfig(
        window_days=cfg.window_days,
        ema_alpha=cfg.ema_alpha,
        consistency_weighting=cfg.consistency_weighting,
    )
    source_table = build_source_scores(
        [r for r in history if r.kind == "source"], scoring_cfg, as_of=cfg.as_of
    )
    entity_table = build_entity_scores(
        [r for r in history if r.kind == "entity"], None, as_of=cfg.as_of
    )

    if cfg.label_model == "planted_regression" and cfg.zero_threshold == 0.0:
        bad = [k for k, v in source_table.scores.items() if v <= 0]
        if bad:
            raise DataError(
                "planted regression needs positive source scores; "
                f"{len(bad)} sources scored 0 (is consistency weighting on?)"
            )

    category_names = list(_CATEGORY_POOL[: cfg.n_categories]) + [
        f"category{i:02d}" for i in range(max(0, cfg.n_categories - len(_CATEGORY_POOL)))
    ]
    category_mult = _clipped_lognormal(
        rngs["categories"], cfg.category_log_mu, cfg.category_log_sigma, cfg.n_categories
    )
    cat_mult = dict(zip(category_names, category_mult))

    # base articles on a uniform publication grid
    n_spam = round(cfg.n_articles * cfg.spam_fraction)
    n_base = cfg.n_articles - n_spam
    if n_base < 3:
        raise DataError("too few non-spam articles")
    start = datetime(
        cfg.as_of.year, cfg.as_of.month, cfg.as_of.day, tzinfo=timezone.utc
    )
    step = cfg.publish_days * 86400.0 / n_base
    art_rng = rngs["articles"]
    subj_rng = rngs["subjectivity"]
    ent_count_p = (0.3, 0.4, 0.2, 0.1)
    specs: list[_ArticleSpec] = []
    for i in range(n_base):
        n_ent = int(art_rng.choice(4, p=ent_count_p))
        ents = (
            [str(e) for e in art_rng.choice(entity_names, size=n_ent, replace=False)]
            if n_ent
            else []
        )
        specs.append(
            _ArticleSpec(
                published_at=start + timedelta(seconds=round(i * step)),
                source=str(art_rng.choice(source_names)),
                category=str(art_rng.choice(category_names)),
                entities=ents,
                subjective=bool(subj_rng.random() < 0.5),
            )
        )

    # scoring designation: chronologically earliest survivors
    n_scoring = int(n_base * cfg.ratio[0])
    label_rng = rngs["labels"]
    zero_rng = rngs["zero"]

    def planted_zero(spec: _ArticleSpec) -> bool:
        if cfg.zero_threshold <= 0.0 or cfg.label_model != "planted_regression":
            return False
        score = source_table.scores[spec.source]
        if score <= 0.0:
            return True  # never flips: a zero score has no log-domain label
        below = score < cfg.zero_threshold
        if cfg.zero_noise > 0.0 and zero_rng.random() < cfg.zero_noise:
            below = not below
        return below

    for spec in specs[:n_scoring]:
        if planted_zero(spec):
            spec.tweets = 0
        else:
            jitter = float(np.exp(0.3 * label_rng.standard_normal()))
            spec.tweets = max(1, round(cat_mult[spec.category] * jitter))

    scoring_articles = [
        Article(
            id=f"tmp{i}",
            url="http://x/",
            source=spec.source,
            category=spec.category,
            title="t",
            summary="s",
            published_at=spec.published_at,
            tweets=spec.tweets,
        )
        for i, spec in enumerate(specs[:n_scoring])
    ]
    category_table = build_category_scores(scoring_articles)

    coeffs = dict(cfg.coefficients)
    if cfg.label_model == "power_law":
        draws = sample_power_law(
            label_rng, n_base - n_scoring, cfg.tail_exponent, cfg.tail_max
        )
        zero_mask = zero_rng.random(n_base - n_scoring) < cfg.zero_fraction
        for j, spec in enumerate(specs[n_scoring:]):
            if zero_mask[j]:
                spec.tweets = 0
            else:
                spec.tweets = int(draws[j])
    else:
        for spec in specs[n_scoring:]:
            if planted_zero(spec):
                spec.tweets = 0
                continue
            s_score = source_table.scores[spec.source]
            c_score = category_table.scores[spec.category]
            ent_scores = [entity_table.scores[e] for e in spec.entities]
            ent_max = max(ent_scores) if ent_scores else 0.0
            mu = (
                coeffs["b_S"] * np.log(s_score)
                + coeffs["b_C"] * np.log(c_score)
                + coeffs["b_Entmax"] * ent_max
                + coeffs["intercept"]
            )
            if cfg.label_noise_sigma > 0.0:
                mu += cfg.label_noise_sigma * label_rng.standard_normal()
            spec.tweets = max(1, round(float(np.exp(mu))))

    # spam plants: duplicates, short titles, blocklisted hosts
    spam_rng = rngs["spam"]
    n_dup = n_spam // 2
    n_short = (n_spam - n_dup) // 2
    n_blocked = n_spam - n_dup - n_short
    spam_specs: list[_ArticleSpec] = []
    dup_targets = (
        spam_rng.choice(len(specs), size=n_dup, replace=False) if n_dup else []
    )
    for t in dup_targets:
        target = specs[int(t)]
        spam_specs.append(
            _ArticleSpec(
                published_at=target.published_at + timedelta(seconds=30),
                source=target.source,
                category=target.category,
                entities=[],
                subjective=False,
                tweets=target.tweets,
                spam_kind="duplicate",
                dup_target=int(t),
            )
        )
    week = cfg.publish_days * 86400
    for kind, count in (("short_title", n_short), ("blocked_host", n_blocked)):
        for _ in range(count):
            spam_specs.append(
                _ArticleSpec(
                    published_at=start
                    + timedelta(seconds=int(spam_rng.integers(0, week))),
                    source=str(spam_rng.choice(source_names)),
                    category=str(spam_rng.choice(category_names)),
                    entities=[],
                    subjective=False,
                    tweets=int(spam_rng.integers(0, 5)),
                    spam_kind=kind,
                )
            )

    # ids follow publication order; base articles win timestamp ties
    merged = sorted(
        specs + spam_specs, key=lambda s: (s.published_at, s.spam_kind is not None)
    )
    spec_index = {id(spec): i for i, spec in enumerate(specs)}
    base_ids = {
        spec_index[id(spec)]: f"a{seq:06d}"
        for seq, spec in enumerate(merged)
        if spec.spam_kind is None
    }
    articles: list[Article] = []
    ground_spam: dict[str, list[str]] = {
        "duplicate": [], "short_title": [], "blocked_host": [],
    }
    zero_ids: list[str] = []
    subj_bits: dict[str, int] = {}
    article_entities: dict[str, list[str]] = {}
    for seq, spec in enumerate(merged):
        art_id = f"a{seq:06d}"
        if spec.spam_kind == "duplicate":
            target = specs[spec.dup_target]
            url = f"http://{target.source}.example.com/{base_ids[spec.dup_target]}"
            title, summary = _make_title(spec, art_rng)
        elif spec.spam_kind == "short_title":
            url = f"http://{spec.source}.example.com/{art_id}"
            title, summary = "breaking", "short"
        elif spec.spam_kind == "blocked_host":
            url = f"http://{_SPAM_HOST}/{art_id}"
            title, summary = _make_title(spec, art_rng)
        else:
            url = f"http://{spec.source}.example.com/{art_id}"
            title, summary = _make_title(spec, art_rng)
            if spec.tweets == 0:
                zero_ids.append(art_id)
            subj_bits[art_id] = int(spec.subjective)
            article_entities[art_id] = list(spec.entities)
        if spec.spam_kind is not None:
            ground_spam[spec.spam_kind].append(art_id)
        articles.append(
            Article(
                id=art_id,
                url=url,
                source=spec.source,
                category=spec.category,
                title=title,
                summary=summary,
                published_at=spec.published_at,
                tweets=spec.tweets,
            )
        )

    gaz = Gazetteer()
    for name in entity_names:
        gaz.add(name, entity_kinds[name])

    ground_truth = {
        "version": GROUND_TRUTH_VERSION,
        "config": cfg.to_record(),
        "coefficients": coeffs,
        "source_rates": {n: float(r) for n, r in zip(source_names, source_rates)},
        "realized_source_scores": dict(source_table.scores),
        "realized_source_global_mean": source_table.global_mean,
        "realized_category_scores": dict(category_table.scores),
        "realized_entity_scores": dict(entity_table.scores),
        "entity_kinds": entity_kinds,
        "entity_rates": {n: float(r) for n, r in zip(entity_names, entity_rates)},
        "spam_ids": ground_spam,
        "blocklist": [_SPAM_HOST] if n_spam else [],
        "zero_ids": sorted(zero_ids),
        "subjectivity_bits": subj_bits,
        "article_entities": article_entities,
        "scoring_config": {
            "window_days": cfg.window_days,
            "ema_alpha": cfg.ema_alpha,
            "consistency_weighting": cfg.consistency_weighting,
        },
        "ratio": list(cfg.ratio),
        "n_scoring_designated": n_scoring,
        "n_base": n_base,
        "n_spam": n_spam,
    }

    write_articles(articles, os.path.join(out_dir, "articles.jsonl"))
    write_history(
        sorted(history, key=lambda r: (r.kind, r.date, r.key)),
        os.path.join(out_dir, "history.jsonl"),
    )
    write_gazetteer(gaz, os.path.join(out_dir, "gazetteer.tsv"))
    with open(os.path.join(out_dir, "ground_truth.json"), "w", encoding="utf-8") as fh:
        json.dump(ground_truth, fh, sort_keys=True, indent=2)
        fh.write("\n")
    return ground_truth


def _random_entity_block(rng, max_score: float = 10.0) -> tuple[int, float, float]:
    ct = int(rng.choice(4, p=(0.3, 0.4, 0.2, 0.1)))
    if ct == 0:
        return 0, 0.0, 0.0
    scores = rng.uniform(0.0, max_score, size=ct)
    top = float(scores.max())
    return ct, top, min(float(scores.mean()), top)


def make_regression_pairs(
    seed: int,
    n: int,
    coefficients: Optional[dict[str, float]] = None,
    noise_sigma: float = 0.0,
    s_log_mu: float = 6.0,
    s_log_sigma: float = 0.6,
    c_log_mu: float = 4.0,
    c_log_sigma: float = 0.5,
) -> list[tuple[FeatureVector, float]]:
    """Feature/label pairs drawn exactly from the log-linear form.

    With noise_sigma = 0 the labels satisfy the planted equation to float
    precision, so a least-squares fit must recover the coefficients.
    """
    coeffs = dict(coefficients or DEFAULT_COEFFICIENTS)
    rng = np.random.default_rng(seed)
    s = _clipped_lognormal(rng, s_log_mu, s_log_sigma, n)
    c = _clipped_lognormal(rng, c_log_mu, c_log_sigma, n)
    pairs = []
    for i in range(n):
        ct, ent_max, ent_avg = _random_entity_block(rng)
        fv = FeatureVector(
            S=float(s[i]),
            C=float(c[i]),
            Subj=int(rng.random() < 0.5),
            Ent_ct=ct,
            Ent_max=ent_max,
            Ent_avg=ent_avg,
        )
        ln_t = (
            coeffs["b_S"] * np.log(fv.S)
            + coeffs["b_C"] * np.log(fv.C)
            + coeffs["b_Entmax"] * fv.Ent_max
            + coeffs["intercept"]
        )
        if noise_sigma > 0.0:
            ln_t += noise_sigma * rng.standard_normal()
        pairs.append((fv, float(np.exp(ln_t))))
    return pairs


def make_classification_set(
    seed: int,
    n: int,
    mode: str = "feature_model",
    noise: float = 0.0,
    scheme: ClassScheme = DEFAULT_SCHEME,
    coefficients: Optional[dict[str, float]] = None,
) -> list[tuple[FeatureVector, str]]:
    """Labeled feature vectors with a planted class structure.

    mode "feature_model": classes come from tweet counts generated by the
    planted log-linear form plus lognormal noise (noise = sigma of ln T).
    mode "source_bands": the class depends on S only, through quantile
    bands shaped like the A/B/C split; noise is a label flip rate. The
    subjectivity bit is an independent coin in both modes (a planted null
    feature).
    """
    rng = np.random.default_rng(seed)
    coeffs = dict(coefficients or DEFAULT_COEFFICIENTS)
    s = _clipped_lognormal(rng, 3.2, 0.75, n)
    c = _clipped_lognormal(rng, 2.6, 0.5, n)
    pairs: list[tuple[FeatureVector, str]] = []

    if mode == "source_bands":
        q1, q2 = np.quantile(s, 0.76), np.quantile(s, 0.94)
        labels_all = np.where(s < q1, "A", np.where(s < q2, "B", "C"))
        flip = rng.random(n) < noise
        for i in range(n):
            ct, ent_max, ent_avg = _random_entity_block(rng)
            fv = FeatureVector(
                S=float(s[i]), C=float(c[i]), Subj=int(rng.random() < 0.5),
                Ent_ct=ct, Ent_max=ent_max, Ent_avg=ent_avg,
            )
            label = str(labels_all[i])
            if flip[i]:
                others = [lab for lab in scheme.labels if lab != label]
                label = str(others[int(rng.integers(0, len(others)))])
            pairs.append((fv, label))
        return pairs

    if mode != "feature_model":
        raise DataError(f"unknown classification mode {mode!r}")
    for i in range(n):
        ct, ent_max, ent_avg = _random_entity_block(rng)
        fv = FeatureVector(
            S=float(s[i]), C=float(c[i]), Subj=int(rng.random() < 0.5),
            Ent_ct=ct, Ent_max=ent_max, Ent_avg=ent_avg,
        )
        mu = (
            coeffs["b_S"] * np.log(fv.S)
            + coeffs["b_C"] * np.log(fv.C)
            + coeffs["b_Entmax"] * fv.Ent_max
            + coeffs["intercept"]
        )
        if noise > 0.0:
            mu += noise * rng.standard_normal()
        tweets = max(1, round(float(np.exp(mu))))
        pairs.append((fv, assign_class(tweets, scheme)))
    return pairs


def make_zero_tweet_set(
    seed: int, n: int, noise: float = 0.0
) -> list[tuple[FeatureVector, int]]:
    """(features, tweets) pairs where zero-tweet status follows S < median(S),
    flipped with the given noise rate."""
    rng = np.random.default_rng(seed)
    s = _clipped_lognormal(rng, 3.2, 0.75, n)
    threshold = float(np.median(s))
    c = _clipped_lognormal(rng, 2.6, 0.5, n)
    flips = rng.random(n) < noise
    positive_draws = sample_power_law(rng, n, -2.0, 500)
    pairs = []
    for i in range(n):
        ct, ent_max, ent_avg = _random_entity_block(rng)
        fv = FeatureVector(
            S=float(s[i]), C=float(c[i]), Subj=int(rng.random() < 0.5),
            Ent_ct=ct, Ent_max=ent_max, Ent_avg=ent_avg,
        )
        zero = s[i] < threshold
        if flips[i]:
            zero = not zero
        pairs.append((fv, 0 if zero else int(positive_draws[i])))
    return pairs


def make_stationary_history(
    seed: int,
    n_sources: int,
    days: int,
    as_of: date,
    mean_links: float = 20.0,
    rate_log_mu: float = 1.2,
    rate_log_sigma: float = 0.8,
) -> tuple[list[HistoryRecord], dict[str, float]]:
    """Poisson-noisy daily observations around fixed per-source rates."""
    rng = np.random.default_rng(seed)
    names = [f"source{i:03d}" for i in range(n_sources)]
    rates = _clipped_lognormal(rng, rate_log_mu, rate_log_sigma, n_sources)
    records = []
    start = as_of - timedelta(days=days)
    for offset in range(days):
        day = start + timedelta(days=offset)
        for name, rate in zip(names, rates):
            links = int(rng.poisson(mean_links))
            tweets = int(rng.poisson(rate * links)) if links > 0 else 0
            records.append(HistoryRecord(day, name, links, tweets, "source"))
    return records, {n: float(r) for n, r in zip(names, rates)}


def make_ratings_fixture(seed: int, n_sources: int = 90):
    """External ratings that track publication volume but not t-density."""
    from .corpus import SourceAggregate
    from .evaluation import ExternalRating

    rng = np.random.default_rng(seed)
    names = [f"source{i:03d}" for i in range(n_sources)]
    links = np.maximum(1, np.round(_clipped_lognormal(rng, 4.5, 1.0, n_sources))).astype(int)
    rates = _clipped_lognormal(rng, 1.2, 0.8, n_sources)
    aggregates = {}
    ratings = []
    for name, n_links, rate in zip(names, links, rates):
        tweets = max(0, round(float(n_links) * float(rate)))
        aggregates[name] = SourceAggregate(links=int(n_links), tweets=tweets)
        ratings.append(ExternalRating(source=name, rating=float(n_links) * 10.0))
    return ratings, aggregates
