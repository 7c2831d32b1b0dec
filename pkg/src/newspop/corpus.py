"""Parse, validate, clean, and partition article corpora and history files.

Corpus files are JSONL, one record per line:

  articles.jsonl  {id, url, source, category, title, summary, published_at, tweets?}
  history.jsonl   {date, key, links, tweets, kind}   kind in {source, entity}

All operations here are pure functions of their inputs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from datetime import date, datetime, timezone
from typing import Iterable, Optional, Sequence
from urllib.parse import urlparse

import numpy as np

from .errors import DataError, FormatError

HISTORY_KINDS = ("source", "entity")


def normalize_key(name: str) -> str:
    """Case-fold and whitespace-normalize a source/category/entity key."""
    return " ".join(name.split()).casefold()


@dataclass(frozen=True)
class Article:
    id: str
    url: str
    source: str
    category: str
    title: str
    summary: str
    published_at: datetime
    tweets: Optional[int] = None

    def to_record(self) -> dict:
        rec = {
            "id": self.id,
            "url": self.url,
            "source": self.source,
            "category": self.category,
            "title": self.title,
            "summary": self.summary,
            "published_at": format_timestamp(self.published_at),
        }
        if self.tweets is not None:
            rec["tweets"] = self.tweets
        return rec


@dataclass(frozen=True)
class HistoryRecord:
    date: date
    key: str
    links: int
    tweets: int
    kind: str = "source"


@dataclass
class CorpusPartition:
    scoring_set: list[Article]
    train_set: list[Article]
    test_set: list[Article]


@dataclass
class CleanConfig:
    # min_title_tokens below which an article counts as spam
    min_title_tokens: int = 3
    host_blocklist: frozenset[str] = frozenset()


@dataclass
class CleanReport:
    input_count: int = 0
    output_count: int = 0
    duplicates: int = 0
    short_title: int = 0
    blocked_host: int = 0

    @property
    def removed(self) -> int:
        return self.duplicates + self.short_title + self.blocked_host


@dataclass(frozen=True)
class ParseError:
    line: int
    reason: str


def format_timestamp(ts: datetime) -> str:
    return ts.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def parse_timestamp(raw: str) -> datetime:
    ts = datetime.fromisoformat(raw.replace("Z", "+00:00"))
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc)


_REQUIRED_FIELDS = ("id", "url", "source", "category", "title", "summary", "published_at")


def _article_from_record(rec: dict) -> Article:
    for name in _REQUIRED_FIELDS:
        if name not in rec:
            raise ValueError(f"missing field {name!r}")
    for name in ("id", "url"):
        if not str(rec[name]):
            raise ValueError(f"empty field {name!r}")
    try:
        published_at = parse_timestamp(str(rec["published_at"]))
    except ValueError:
        raise ValueError(f"bad timestamp {rec['published_at']!r}") from None
    tweets = rec.get("tweets")
    if tweets is not None:
        if not isinstance(tweets, int) or isinstance(tweets, bool):
            raise ValueError(f"tweets must be an integer, got {tweets!r}")
        if tweets < 0:
            raise ValueError(f"negative tweets {tweets}")
    return Article(
        id=str(rec["id"]),
        url=str(rec["url"]),
        source=str(rec["source"]),
        category=str(rec["category"]),
        title=str(rec["title"]),
        summary=str(rec["summary"]),
        published_at=published_at,
        tweets=tweets,
    )


def parse_articles(path, format: str = "jsonl") -> tuple[list[Article], list[ParseError]]:
    """Parse an articles file; returns (articles, per-line rejections).

    Raises FormatError when more than half of the non-blank lines are
    malformed, or when an id appears twice.
    """
    if format != "jsonl":
        raise FormatError(f"unsupported corpus format {format!r}")
    articles: list[Article] = []
    errors: list[ParseError] = []
    seen_ids: set[str] = set()
    n_lines = 0
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            n_lines += 1
            try:
                rec = json.loads(line)
                if not isinstance(rec, dict):
                    raise ValueError("line is not a JSON object")
                art = _article_from_record(rec)
            except (ValueError, TypeError) as exc:
                errors.append(ParseError(lineno, str(exc)))
                continue
            if art.id in seen_ids:
                raise FormatError(f"duplicate article id {art.id!r} at line {lineno}")
            seen_ids.add(art.id)
            articles.append(art)
    if n_lines > 0 and len(errors) * 2 > n_lines:
        raise FormatError(
            f"wrong format: {len(errors)} of {n_lines} lines malformed in {path}"
        )
    return articles, errors


def write_articles(articles: Iterable[Article], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for art in articles:
            fh.write(json.dumps(art.to_record(), sort_keys=True) + "\n")


def parse_history(path, kind: Optional[str] = None) -> list[HistoryRecord]:
    """Parse a history file, optionally filtered to one kind."""
    records: list[HistoryRecord] = []
    seen: set[tuple[str, date, str]] = set()
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                rec_kind = rec.get("kind", "source")
                if rec_kind not in HISTORY_KINDS:
                    raise ValueError(f"unknown history kind {rec_kind!r}")
                day = date.fromisoformat(rec["date"])
                links = int(rec["links"])
                tweets = int(rec["tweets"])
                if links < 0 or tweets < 0:
                    raise ValueError("negative links/tweets")
                hist = HistoryRecord(day, str(rec["key"]), links, tweets, rec_kind)
            except (KeyError, ValueError, TypeError) as exc:
                raise FormatError(f"bad history line {lineno}: {exc}") from None
            ident = (hist.kind, hist.date, hist.key)
            if ident in seen:
                raise FormatError(f"duplicate history record {ident} at line {lineno}")
            seen.add(ident)
            records.append(hist)
    if kind is not None:
        records = [r for r in records if r.kind == kind]
    return records


def write_history(records: Iterable[HistoryRecord], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(
                json.dumps(
                    {
                        "date": rec.date.isoformat(),
                        "key": rec.key,
                        "links": rec.links,
                        "tweets": rec.tweets,
                        "kind": rec.kind,
                    },
                    sort_keys=True,
                )
                + "\n"
            )


def _host(url: str) -> str:
    return normalize_key(urlparse(url).netloc)


def clean(
    articles: Sequence[Article], rules: Optional[CleanConfig] = None
) -> tuple[list[Article], CleanReport]:
    """Normalize source names, drop spam, and deduplicate by URL.

    Spam first (short title, blocklisted host), then URL dedup keeping the
    earliest published_at (ties by id). Cleaning is total and idempotent.
    """
    rules = rules or CleanConfig()
    report = CleanReport(input_count=len(articles))

    normalized = [
        art if art.source == normalize_key(art.source)
        else Article(
            art.id, art.url, normalize_key(art.source), art.category,
            art.title, art.summary, art.published_at, art.tweets,
        )
        for art in articles
    ]

    survivors: list[Article] = []
    for art in normalized:
        if len(art.title.split()) < rules.min_title_tokens:
            report.short_title += 1
        elif _host(art.url) in rules.host_blocklist:
            report.blocked_host += 1
        else:
            survivors.append(art)

    keeper_by_url: dict[str, Article] = {}
    for art in survivors:
        prev = keeper_by_url.get(art.url)
        if prev is None or (art.published_at, art.id) < (prev.published_at, prev.id):
            keeper_by_url[art.url] = art
    kept_ids = {art.id for art in keeper_by_url.values()}
    report.duplicates = len(survivors) - len(kept_ids)

    out = [art for art in survivors if art.id in kept_ids]
    report.output_count = len(out)
    return out, report


def split(
    articles: Sequence[Article],
    ratio: tuple[float, float, float] = (0.5, 0.25, 0.25),
    seed: int = 0,
) -> CorpusPartition:
    """Partition into (scoring, train, test) sets.

    The scoring set is the chronologically earliest fraction; train and
    test are drawn from the remainder by seeded shuffle. Sizes: floor for
    scoring and train, remainder to test.
    """
    if len(articles) < 3:
        raise DataError(f"need at least 3 articles to split, got {len(articles)}")
    if any(r <= 0 for r in ratio):
        raise DataError(f"ratio components must be positive, got {ratio}")
    if abs(sum(ratio) - 1.0) > 1e-9:
        raise DataError(f"ratio must sum to 1, got {ratio}")

    ordered = sorted(articles, key=lambda a: (a.published_at, a.id))
    n = len(ordered)
    n_scoring = int(n * ratio[0])
    n_train = int(n * ratio[1])

    scoring_set = ordered[:n_scoring]
    rest = ordered[n_scoring:]
    rng = np.random.default_rng(seed)
    perm = rng.permutation(len(rest))
    shuffled = [rest[i] for i in perm]
    return CorpusPartition(
        scoring_set=scoring_set,
        train_set=shuffled[:n_train],
        test_set=shuffled[n_train:],
    )


@dataclass
class SourceAggregate:
    links: int = 0
    tweets: int = 0

    @property
    def t_density(self) -> float:
        if self.links == 0:
            raise DataError("undefined t-density: source has no links")
        return self.tweets / self.links


def aggregate_by_source(articles: Iterable[Article]) -> dict[str, SourceAggregate]:
    """Per-source link/tweet totals over labeled articles."""
    out: dict[str, SourceAggregate] = {}
    for art in articles:
        if art.tweets is None:
            continue
        agg = out.setdefault(normalize_key(art.source), SourceAggregate())
        agg.links += 1
        agg.tweets += art.tweets
    return out
