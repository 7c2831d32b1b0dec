from datetime import date, timedelta

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from newspop.corpus import HistoryRecord
from newspop.errors import DataError
from newspop.scoring import (
    FeatureVector,
    ScoreTable,
    ScoringConfig,
    assemble_features,
    build_category_scores,
    build_entity_scores,
    build_source_scores,
    plain_window_density,
    sweep_history_window,
    t_density,
)

from conftest import make_article

AS_OF = date(2011, 8, 8)


def days_before(n):
    return AS_OF - timedelta(days=n)


def history(rows, kind="source"):
    """rows: (days_before_as_of, key, links, tweets)"""
    return [HistoryRecord(days_before(d), k, l, t, kind) for d, k, l, t in rows]


class TestTDensity:
    def test_ratio(self):
        assert t_density(2, 12) == 6.0

    def test_zero_tweets(self):
        assert t_density(5, 0) == 0.0

    def test_zero_links_is_an_error(self):
        with pytest.raises(DataError, match="undefined t-density"):
            t_density(0, 7)

    def test_negative_guard(self):
        with pytest.raises(DataError):
            t_density(-1, 0)


class TestCategoryScores:
    def test_hand_example(self):
        articles = [
            make_article(1, category="X", tweets=4),
            make_article(2, category="X", tweets=6),
            make_article(3, category="Y", tweets=1),
        ]
        table = build_category_scores(articles)
        assert table.scores == {"x": 5.0, "y": 1.0}
        assert table.global_mean == 11 / 3
        assert table.kind == "category"

    def test_single_category_equals_global_mean(self):
        articles = [make_article(i, category="only", tweets=t) for i, t in enumerate([2, 4])]
        table = build_category_scores(articles)
        assert table.scores == {"only": 3.0}
        assert table.global_mean == 3.0

    def test_all_zero_labels(self):
        articles = [make_article(i, tweets=0) for i in range(3)]
        table = build_category_scores(articles)
        assert set(table.scores.values()) == {0.0}

    def test_empty_fatal(self):
        with pytest.raises(DataError):
            build_category_scores([])

    def test_unlabeled_fatal(self):
        with pytest.raises(DataError, match="label"):
            build_category_scores([make_article(1, tweets=None)])


class TestSourceScores:
    def test_constant_series_is_ema_fixed_point(self):
        recs = history([(3, "a", 2, 20), (2, "a", 2, 20), (1, "a", 2, 20)])
        cfg = ScoringConfig(consistency_weighting=False)
        table = build_source_scores(recs, cfg, as_of=AS_OF)
        assert table.scores["a"] == 10.0

    def test_hand_ema(self):
        recs = history([(2, "a", 1, 8), (1, "a", 1, 2)])
        cfg = ScoringConfig(ema_alpha=0.3, consistency_weighting=False)
        table = build_source_scores(recs, cfg, as_of=AS_OF)
        assert table.scores["a"] == pytest.approx(6.2, abs=1e-12)

    def test_weighting_endpoints(self):
        # a sits above the global mean every day, b below every day
        recs = history(
            [(2, "a", 1, 10), (1, "a", 1, 10), (2, "b", 1, 2), (1, "b", 1, 2)]
        )
        on = build_source_scores(recs, ScoringConfig(consistency_weighting=True), as_of=AS_OF)
        off = build_source_scores(recs, ScoringConfig(consistency_weighting=False), as_of=AS_OF)
        assert on.scores["b"] == 0.0
        assert on.scores["a"] == off.scores["a"] == 10.0
        assert on.global_mean == 6.0  # mean of window densities 10 and 2

    def test_days_without_links_are_skipped_not_zero(self):
        recs = history([(3, "a", 1, 8), (2, "a", 0, 0), (1, "a", 1, 2)])
        cfg = ScoringConfig(ema_alpha=0.3, consistency_weighting=False)
        table = build_source_scores(recs, cfg, as_of=AS_OF)
        assert table.scores["a"] == pytest.approx(6.2, abs=1e-12)

    def test_window_restriction(self):
        recs = history([(60, "a", 1, 100), (1, "a", 1, 4)])
        cfg = ScoringConfig(window_days=54, consistency_weighting=False)
        table = build_source_scores(recs, cfg, as_of=AS_OF)
        assert table.scores["a"] == 4.0

    def test_source_with_no_defined_day_is_omitted(self):
        recs = history([(1, "a", 1, 4), (2, "b", 0, 0)])
        table = build_source_scores(
            recs, ScoringConfig(consistency_weighting=False), as_of=AS_OF
        )
        assert "b" not in table.scores

    def test_empty_window_fatal(self):
        recs = history([(1, "a", 0, 0)])
        with pytest.raises(DataError, match="no source"):
            build_source_scores(recs, ScoringConfig(), as_of=AS_OF)

    def test_history_after_as_of_fatal(self):
        recs = [HistoryRecord(AS_OF, "a", 1, 1, "source")]
        with pytest.raises(DataError, match="before as_of"):
            build_source_scores(recs, ScoringConfig(), as_of=AS_OF)

    def test_alpha_one_no_weighting_equals_last_defined_day(self):
        recs = history([(3, "a", 1, 9), (2, "a", 1, 5), (1, "a", 1, 7)])
        cfg = ScoringConfig(ema_alpha=1.0, consistency_weighting=False)
        table = build_source_scores(recs, cfg, as_of=AS_OF)
        assert table.scores["a"] == 7.0
        # for a constant series this agrees exactly with the window aggregate
        const = history([(3, "b", 2, 6), (2, "b", 2, 6), (1, "b", 2, 6)])
        t2 = build_source_scores(const, cfg, as_of=AS_OF)
        plain = plain_window_density(const, 54, AS_OF)
        assert t2.scores["b"] == plain["b"] == 3.0

    @pytest.mark.parametrize("scale", [2, 4, 8])
    @pytest.mark.parametrize("weighting", [True, False])
    def test_homogeneity_power_of_two_exact(self, scale, weighting):
        rows = [
            (5, "a", 2, 9), (4, "a", 3, 4), (2, "a", 1, 7),
            (5, "b", 4, 2), (3, "b", 2, 11), (1, "b", 5, 5),
            (4, "c", 1, 1), (2, "c", 2, 2),
        ]
        base = history(rows)
        scaled = history([(d, k, l, t * scale) for d, k, l, t in rows])
        cfg = ScoringConfig(consistency_weighting=weighting)
        t1 = build_source_scores(base, cfg, as_of=AS_OF)
        t2 = build_source_scores(scaled, cfg, as_of=AS_OF)
        assert t2.global_mean == scale * t1.global_mean
        for key in t1.scores:
            assert t2.scores[key] == scale * t1.scores[key]

    def test_homogeneity_general_scale_close(self):
        rows = [(5, "a", 2, 9), (4, "a", 3, 4), (5, "b", 4, 2), (3, "b", 2, 11)]
        cfg = ScoringConfig(consistency_weighting=True)
        t1 = build_source_scores(history(rows), cfg, as_of=AS_OF)
        t3 = build_source_scores(
            history([(d, k, l, t * 3) for d, k, l, t in rows]), cfg, as_of=AS_OF
        )
        for key in t1.scores:
            assert t3.scores[key] == pytest.approx(3 * t1.scores[key], rel=1e-12)


class TestEntityScores:
    def test_plain_window_ratio(self):
        recs = history([(10, "obama", 1, 10), (5, "obama", 2, 20)], kind="entity")
        table = build_entity_scores(recs, None, as_of=AS_OF)
        assert table.scores["obama"] == 10.0
        assert table.kind == "entity"

    def test_absent_from_window_absent_from_table(self):
        recs = history([(40, "old", 3, 30), (5, "fresh", 1, 2)], kind="entity")
        table = build_entity_scores(recs, None, as_of=AS_OF)  # default 30-day window
        assert "old" not in table.scores and table.scores["fresh"] == 2.0

    def test_hand_built_two_entities(self):
        recs = history(
            [(9, "a", 2, 10), (3, "a", 2, 2), (7, "b", 1, 9)], kind="entity"
        )
        table = build_entity_scores(recs, None, as_of=AS_OF)
        assert table.scores == {"a": 3.0, "b": 9.0}
        assert table.global_mean == 6.0

    def test_custom_window_via_config(self):
        recs = history([(40, "x", 1, 8), (5, "x", 1, 2)], kind="entity")
        table = build_entity_scores(recs, ScoringConfig(window_days=60), as_of=AS_OF)
        assert table.scores["x"] == 5.0


class TestSweep:
    def test_self_correlation_is_one(self):
        rows = [
            (d, key, 1, tweets)
            for key, tweets in (("a", 2), ("b", 9), ("c", 5), ("d", 14))
            for d in range(1, 20)
        ]
        recs = history(rows)
        labels = plain_window_density(recs, 14, AS_OF)
        points = sweep_history_window(recs, labels, [14], as_of=AS_OF)
        assert points[0][0] == 14
        assert points[0][1] == pytest.approx(1.0, abs=1e-12)

    def test_too_few_common_sources_fatal(self):
        recs = history([(1, "a", 1, 1), (1, "b", 1, 2)])
        with pytest.raises(DataError, match="common"):
            sweep_history_window(recs, {"a": 1.0, "b": 2.0}, [14], as_of=AS_OF)

    def test_unsorted_windows_fatal(self):
        recs = history([(1, k, 1, 1) for k in "abc"])
        with pytest.raises(DataError, match="sorted"):
            sweep_history_window(recs, {"a": 1.0, "b": 2.0, "c": 3.0}, [30, 14], as_of=AS_OF)


class TestFeatureVector:
    def test_invariant_violations_rejected(self):
        with pytest.raises(DataError):
            FeatureVector(S=1, C=1, Subj=0, Ent_ct=0, Ent_max=2.0, Ent_avg=0.0)
        with pytest.raises(DataError):
            FeatureVector(S=1, C=1, Subj=0, Ent_ct=2, Ent_max=1.0, Ent_avg=3.0)

    def test_record_round_trip(self):
        fv = FeatureVector(S=2.5, C=1.0, Subj=1, Ent_ct=2, Ent_max=9.0, Ent_avg=5.5)
        assert FeatureVector.from_record(fv.to_record()) == fv


class TestAssemble:
    def _tables(self):
        source = ScoreTable("source", {"mashable": 74.0, "blog maverick": 178.0}, 6.4)
        category = ScoreTable("category", {"technology": 12.0}, 5.0)
        entity = ScoreTable("entity", {"obama": 4.0, "oprah winfrey": 10.0}, 7.0)
        return source, category, entity

    def test_fallbacks_for_unseen_keys(self, toy_subjectivity_model, toy_gazetteer):
        source, category, entity = self._tables()
        art = make_article(1, source="brand new blog", category="never seen")
        fv = assemble_features(
            art, source, category, entity, toy_subjectivity_model, toy_gazetteer
        )
        assert fv.S == 6.4 and fv.C == 5.0
        assert fv.Ent_ct == 0 and fv.Ent_max == 0.0 and fv.Ent_avg == 0.0

    def test_entity_aggregation(self, toy_subjectivity_model, toy_gazetteer):
        source, category, entity = self._tables()
        art = make_article(
            1, title="Obama met Oprah Winfrey", summary="reported stated"
        )
        fv = assemble_features(
            art, source, category, entity, toy_subjectivity_model, toy_gazetteer
        )
        assert fv.Ent_ct == 2
        assert fv.Ent_max == 10.0
        assert fv.Ent_avg == 7.0
        assert fv.S == 74.0  # known source
        assert fv.Subj == 0

    def test_unknown_entity_counts_with_zero_score(
        self, toy_subjectivity_model, toy_gazetteer
    ):
        source, category, entity = self._tables()
        art = make_article(1, title="google and Obama", summary="")
        fv = assemble_features(
            art, source, category, entity, toy_subjectivity_model, toy_gazetteer
        )
        assert fv.Ent_ct == 2  # google is in the gazetteer but not the table
        assert fv.Ent_max == 4.0
        assert fv.Ent_avg == 2.0

    def test_subjective_title(self, toy_subjectivity_model, toy_gazetteer):
        source, category, entity = self._tables()
        art = make_article(1, title="awful terrible outrageous news", summary="")
        fv = assemble_features(
            art, source, category, entity, toy_subjectivity_model, toy_gazetteer
        )
        assert fv.Subj == 1

    @given(st.permutations(["google", "awful", "obama", "coverage", "terrible", "news"]))
    @settings(max_examples=40)
    def test_token_order_invariance(self, words):
        # single-token entities: any reordering yields the same vector
        # (multi-word entities inherently need their phrase contiguous)
        source = ScoreTable("source", {"mashable": 74.0}, 6.4)
        category = ScoreTable("category", {"technology": 12.0}, 5.0)
        entity = ScoreTable("entity", {"obama": 4.0, "google": 9.0}, 7.0)
        from newspop.textfeat import Gazetteer, LabeledDoc, train_subjectivity

        gaz = Gazetteer()
        gaz.add("obama", "person")
        gaz.add("google", "organization")
        docs = [LabeledDoc("awful terrible outrageous", "subjective")] * 10 + [
            LabeledDoc("reported stated announced", "objective")
        ] * 10
        subj = train_subjectivity(docs)
        base_art = make_article(1, title=" ".join(sorted(words)), summary="")
        permuted_art = make_article(1, title=" ".join(words), summary="")
        base = assemble_features(base_art, source, category, entity, subj, gaz)
        permuted = assemble_features(permuted_art, source, category, entity, subj, gaz)
        assert base == permuted


class TestScoreTableIO:
    def test_save_load_round_trip(self, tmp_path):
        table = ScoreTable("source", {"a": 1.5, "b": 0.25}, 0.875, "test window")
        path = tmp_path / "t.json"
        table.save(path)
        loaded = ScoreTable.load(path)
        assert loaded == table

    def test_bad_version_rejected(self, tmp_path):
        path = tmp_path / "t.json"
        path.write_text('{"version": 99, "kind": "source", "scores": {}, "global_mean": 0}')
        with pytest.raises(DataError, match="version"):
            ScoreTable.load(path)

    def test_byte_stable(self, tmp_path):
        table = ScoreTable("entity", {"b": 2.0, "a": 1.0}, 1.5)
        p1, p2 = tmp_path / "1.json", tmp_path / "2.json"
        table.save(p1)
        table.save(p2)
        assert p1.read_bytes() == p2.read_bytes()


class TestScoringConfig:
    @pytest.mark.parametrize("kw", [{"window_days": 0}, {"ema_alpha": 0.0}, {"ema_alpha": 1.1}])
    def test_validation(self, kw):
        with pytest.raises(DataError):
            ScoringConfig(**kw)


@given(
    st.lists(
        st.tuples(st.integers(1, 53), st.sampled_from("abcd"), st.integers(1, 9), st.integers(0, 99)),
        min_size=1,
        max_size=40,
        unique_by=lambda r: (r[0], r[1]),
    )
)
@settings(max_examples=60)
def test_scores_are_reproducible_and_nonnegative(rows):
    recs = history(list(rows))
    cfg = ScoringConfig()
    t1 = build_source_scores(recs, cfg, as_of=AS_OF)
    t2 = build_source_scores(recs, cfg, as_of=AS_OF)
    assert t1 == t2
    assert all(v >= 0 for v in t1.scores.values())
    assert t1.global_mean >= 0
