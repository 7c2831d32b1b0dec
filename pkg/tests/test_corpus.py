import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from newspop.corpus import (
    Article,
    CleanConfig,
    aggregate_by_source,
    clean,
    normalize_key,
    parse_articles,
    parse_history,
    split,
    write_articles,
    write_history,
)
from newspop.errors import DataError, FormatError

from conftest import make_article, utc


GOOD_LINE = {
    "id": "a1",
    "url": "http://x/1",
    "source": "mashable",
    "category": "Technology",
    "title": "T",
    "summary": "S",
    "published_at": "2011-08-08T00:00:00Z",
    "tweets": 360,
}


def write_lines(path, records):
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec) + "\n")


class TestParse:
    def test_good_line(self, tmp_path):
        path = tmp_path / "a.jsonl"
        write_lines(path, [GOOD_LINE])
        articles, errors = parse_articles(path)
        assert errors == []
        assert len(articles) == 1
        assert articles[0].tweets == 360
        assert articles[0].published_at == utc(2011, 8, 8)

    def test_empty_file(self, tmp_path):
        path = tmp_path / "a.jsonl"
        path.write_text("")
        articles, errors = parse_articles(path)
        assert articles == [] and errors == []

    def test_missing_field_names_it(self, tmp_path):
        rec = dict(GOOD_LINE)
        del rec["source"]
        path = tmp_path / "a.jsonl"
        write_lines(path, [rec, dict(GOOD_LINE, id="a2", url="http://x/2")])
        articles, errors = parse_articles(path)
        assert [a.id for a in articles] == ["a2"]
        assert len(errors) == 1
        assert "source" in errors[0].reason
        assert errors[0].line == 1

    @pytest.mark.parametrize(
        "patch,needle",
        [
            ({"published_at": "not-a-date"}, "timestamp"),
            ({"tweets": -3}, "negative"),
            ({"tweets": 1.5}, "integer"),
            ({"url": ""}, "url"),
        ],
    )
    def test_bad_values(self, tmp_path, patch, needle):
        rec = dict(GOOD_LINE)
        rec.update(patch)
        path = tmp_path / "a.jsonl"
        write_lines(path, [rec, dict(GOOD_LINE, id="a2", url="http://x/2")])
        _, errors = parse_articles(path)
        assert len(errors) == 1 and needle in errors[0].reason

    def test_tweets_optional(self, tmp_path):
        rec = dict(GOOD_LINE)
        del rec["tweets"]
        path = tmp_path / "a.jsonl"
        write_lines(path, [rec])
        articles, errors = parse_articles(path)
        assert articles[0].tweets is None and not errors

    def test_mostly_malformed_is_fatal(self, tmp_path):
        path = tmp_path / "a.jsonl"
        good = json.dumps(GOOD_LINE)
        path.write_text(f"{good}\nnot json\nnot json either\n")
        with pytest.raises(FormatError, match="wrong format"):
            parse_articles(path)

    def test_duplicate_id_is_fatal(self, tmp_path):
        path = tmp_path / "a.jsonl"
        second = dict(GOOD_LINE, url="http://x/2")
        write_lines(path, [GOOD_LINE, second])
        with pytest.raises(FormatError, match="duplicate"):
            parse_articles(path)

    def test_unreadable_file_is_fatal(self, tmp_path):
        with pytest.raises(OSError):
            parse_articles(tmp_path / "missing.jsonl")

    def test_round_trip_identity(self, tmp_path):
        articles = [
            make_article(1, tweets=None),
            make_article(2, source="Blog Maverick", tweets=178),
            make_article(3, title="unicode title café", tweets=0),
        ]
        p1, p2 = tmp_path / "one.jsonl", tmp_path / "two.jsonl"
        write_articles(articles, p1)
        parsed, _ = parse_articles(p1)
        write_articles(parsed, p2)
        reparsed, _ = parse_articles(p2)
        assert parsed == reparsed == articles


class TestHistory:
    def test_round_trip_and_kind_filter(self, tmp_path):
        from newspop.corpus import HistoryRecord
        from datetime import date

        records = [
            HistoryRecord(date(2011, 8, 1), "mashable", 10, 740, "source"),
            HistoryRecord(date(2011, 8, 1), "obama", 3, 30, "entity"),
        ]
        path = tmp_path / "h.jsonl"
        write_history(records, path)
        assert parse_history(path) == records
        assert parse_history(path, kind="entity") == [records[1]]

    def test_duplicate_day_key_fatal(self, tmp_path):
        path = tmp_path / "h.jsonl"
        line = json.dumps(
            {"date": "2011-08-01", "key": "m", "links": 1, "tweets": 2, "kind": "source"}
        )
        path.write_text(line + "\n" + line + "\n")
        with pytest.raises(FormatError, match="duplicate"):
            parse_history(path)

    def test_negative_counts_fatal(self, tmp_path):
        path = tmp_path / "h.jsonl"
        path.write_text(
            json.dumps({"date": "2011-08-01", "key": "m", "links": -1, "tweets": 2}) + "\n"
        )
        with pytest.raises(FormatError):
            parse_history(path)


class TestClean:
    def test_duplicate_url_keeps_earliest(self):
        early = make_article(1, url="http://x/same", published_at=utc(2011, 8, 8))
        late = make_article(2, url="http://x/same", published_at=utc(2011, 8, 9))
        out, report = clean([late, early])
        assert [a.id for a in out] == ["a1"]
        assert report.duplicates == 1

    def test_duplicate_tie_breaks_by_id(self):
        a = make_article(1, url="http://x/same")
        b = make_article(2, url="http://x/same", published_at=a.published_at)
        out, _ = clean([b, a])
        assert [a_.id for a_ in out] == ["a1"]

    def test_source_normalization(self):
        a = make_article(1, source="Mashable ")
        b = make_article(2, source="mashable")
        out, _ = clean([a, b])
        assert {x.source for x in out} == {"mashable"}
        assert normalize_key("  Blog   Maverick ") == "blog maverick"

    def test_short_title_dropped(self):
        out, report = clean([make_article(1, title="too short")])
        assert out == [] and report.short_title == 1

    def test_blocklist(self):
        cfg = CleanConfig(host_blocklist=frozenset({"spamfarm.example"}))
        spam = make_article(1, url="http://spamfarm.example/a1")
        ok = make_article(2)
        out, report = clean([spam, ok], cfg)
        assert [a.id for a in out] == ["a2"]
        assert report.blocked_host == 1

    @given(
        st.lists(
            st.tuples(
                st.integers(0, 30),  # url pool index
                st.sampled_from(["Mashable", "mashable ", "BBC News", "cnn"]),
                st.integers(0, 10 ** 6),  # seconds offset
                st.sampled_from(["midday roundup briefing", "brief"]),
            ),
            max_size=30,
        )
    )
    @settings(max_examples=50)
    def test_clean_is_idempotent(self, rows):
        from datetime import timedelta

        articles = [
            make_article(
                i,
                url=f"http://x/{u}",
                source=src,
                published_at=utc(2011, 8, 8) + timedelta(seconds=off),
                title=title,
            )
            for i, (u, src, off, title) in enumerate(rows)
        ]
        once, r1 = clean(articles)
        twice, r2 = clean(once)
        assert once == twice
        assert r2.duplicates == r2.short_title == r2.blocked_host == 0

    def test_clean_is_total_and_counts_add_up(self):
        articles = [
            make_article(1),
            make_article(2, url=make_article(1).url),
            make_article(3, title="no"),
        ]
        out, report = clean(articles)
        assert report.input_count == 3
        assert report.output_count == len(out) == 1
        assert report.removed == 2


class TestSplit:
    def test_paper_sized_partition(self):
        articles = [make_article(i) for i in range(40_000)]
        part = split(articles, (0.5, 0.25, 0.25), seed=1)
        assert (len(part.scoring_set), len(part.train_set), len(part.test_set)) == (
            20_000,
            10_000,
            10_000,
        )

    def test_rounding_rule(self):
        articles = [make_article(i) for i in range(4)]
        part = split(articles, (0.5, 0.25, 0.25), seed=99)
        assert (len(part.scoring_set), len(part.train_set), len(part.test_set)) == (2, 1, 1)

    def test_determinism(self):
        articles = [make_article(i) for i in range(100)]
        p1 = split(articles, (0.5, 0.25, 0.25), seed=7)
        p2 = split(articles, (0.5, 0.25, 0.25), seed=7)
        assert p1.train_set == p2.train_set and p1.test_set == p2.test_set

    def test_different_seed_changes_shuffle(self):
        articles = [make_article(i) for i in range(100)]
        p1 = split(articles, (0.5, 0.25, 0.25), seed=7)
        p2 = split(articles, (0.5, 0.25, 0.25), seed=8)
        assert p1.scoring_set == p2.scoring_set  # chronological, seed-free
        assert p1.train_set != p2.train_set

    def test_scoring_set_is_chronologically_earliest(self):
        articles = [make_article(i, published_at=utc(2011, 8, 8, 0, 0, 59 - i)) for i in range(60)]
        part = split(articles, (0.5, 0.25, 0.25), seed=3)
        latest_scoring = max(a.published_at for a in part.scoring_set)
        earliest_rest = min(a.published_at for a in part.train_set + part.test_set)
        assert latest_scoring <= earliest_rest

    @given(st.integers(3, 200), st.integers(0, 2 ** 31))
    @settings(max_examples=40)
    def test_split_partitions_ids(self, n, seed):
        articles = [make_article(i) for i in range(n)]
        part = split(articles, (0.5, 0.25, 0.25), seed=seed)
        all_ids = [a.id for a in part.scoring_set + part.train_set + part.test_set]
        assert len(all_ids) == n
        assert set(all_ids) == {a.id for a in articles}

    def test_too_few_articles_fatal(self):
        with pytest.raises(DataError, match="at least 3"):
            split([make_article(1), make_article(2)], (0.5, 0.25, 0.25), seed=0)

    @pytest.mark.parametrize("ratio", [(0.5, 0.5, 0.1), (0.5, 0.5, 0.0), (-0.2, 0.6, 0.6)])
    def test_bad_ratio_fatal(self, ratio):
        articles = [make_article(i) for i in range(10)]
        with pytest.raises(DataError):
            split(articles, ratio, seed=0)


def test_aggregate_by_source():
    articles = [
        make_article(1, source="A", tweets=10),
        make_article(2, source="A", tweets=2),
        make_article(3, source="b", tweets=7),
        make_article(4, source="c", tweets=None),
    ]
    agg = aggregate_by_source(articles)
    assert agg["a"].links == 2 and agg["a"].tweets == 12
    assert agg["a"].t_density == 6.0
    assert set(agg) == {"a", "b"}
