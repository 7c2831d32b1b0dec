import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from newspop.errors import DataError
from newspop.evaluation import (
    EvalReport,
    ExternalRating,
    compare_ratings,
    emit_distribution,
    emit_report,
    evaluate,
    parse_ratings,
)
from newspop.corpus import SourceAggregate
from newspop.metrics import pearson, r_squared
from newspop.models import fit_classifier, fit_regression
from newspop.synth import make_classification_set, make_regression_pairs

from conftest import make_article


class TestMetrics:
    def test_r_squared_examples(self):
        assert r_squared([1.0, 2.0, 3.0], [1.0, 2.0, 3.0]) == 1.0
        assert r_squared([2.0, 2.0, 2.0], [1.0, 2.0, 3.0]) == 0.0
        assert r_squared([1.0, 1.0, 3.0], [1.0, 2.0, 3.0]) == pytest.approx(0.5, abs=1e-15)

    def test_r_squared_can_be_negative(self):
        assert r_squared([10.0, 10.0, 10.0], [1.0, 2.0, 3.0]) < 0

    def test_r_squared_errors(self):
        with pytest.raises(DataError, match="zero variance"):
            r_squared([1.0, 2.0], [5.0, 5.0])
        with pytest.raises(DataError, match="length"):
            r_squared([1.0], [1.0, 2.0])

    def test_pearson_examples(self):
        x = [1.0, 2.0, 3.0, 4.0]
        assert pearson(x, [2 * v + 1 for v in x]) == pytest.approx(1.0, abs=1e-15)
        assert pearson(x, [-v for v in x]) == pytest.approx(-1.0, abs=1e-15)
        assert pearson([1.0, 2.0, 3.0], [1.0, 3.0, 2.0]) == pytest.approx(0.5, abs=1e-15)

    def test_pearson_errors(self):
        with pytest.raises(DataError):
            pearson([1.0, 2.0], [1.0, 2.0])  # too short
        with pytest.raises(DataError, match="zero variance"):
            pearson([1.0, 1.0, 1.0], [1.0, 2.0, 3.0])

    def test_pearson_symmetry_and_affine_invariance(self):
        rng = np.random.default_rng(0)
        for _ in range(200):
            x = rng.normal(size=8)
            y = rng.normal(size=8)
            a = float(rng.uniform(0.1, 5) * rng.choice([-1, 1]))
            b = float(rng.normal())
            r = pearson(x, y)
            assert pearson(y, x) == pytest.approx(r, abs=1e-12)
            assert pearson(a * x + b, y) == pytest.approx(math.copysign(1, a) * r, abs=1e-9)


class TestEvaluate:
    def test_oracle_classifier_full_accuracy(self):
        import sys, os
        sys.path.insert(0, os.path.dirname(__file__))
        from test_classifiers import _separable

        train = _separable(n=120, seed=0)
        test = _separable(n=60, seed=99)
        model = fit_classifier(train, "decision_tree")
        report = evaluate(model, test)
        assert report.accuracy == 1.0
        for cls, row in report.confusion.items():
            for pred, count in row.items():
                assert count == 0 or pred == cls

    def test_majority_constant_model(self):
        # min_leaf swallows everything: the tree is a single majority leaf
        train = make_classification_set(seed=3, n=100, noise=1.2)
        test = make_classification_set(seed=4, n=200, noise=1.2)
        model = fit_classifier(train, "decision_tree", {"min_leaf": 60})
        train_labels = [t for _, t in train]
        majority = max(sorted(set(train_labels)), key=train_labels.count)
        preds = model.predict([fv for fv, _ in test])
        assert set(preds) == {majority}
        test_labels = [t for _, t in test]
        report = evaluate(model, test)
        assert report.accuracy == test_labels.count(majority) / len(test_labels)

    def test_regression_oracle_loop(self):
        train = make_regression_pairs(seed=5, n=500)
        test = make_regression_pairs(seed=6, n=300)
        model = fit_regression(train, "log_linear")
        report = evaluate(model, test)
        assert report.r_squared_log_space == pytest.approx(1.0, abs=1e-9)
        assert report.r_squared_raw == pytest.approx(1.0, abs=1e-9)

    def test_leakage_detected(self):
        train = make_regression_pairs(seed=7, n=100)
        model = fit_regression(train, "log_linear")
        with pytest.raises(DataError, match="leakage"):
            evaluate(model, train)

    def test_empty_test_fatal(self):
        train = make_regression_pairs(seed=7, n=100)
        model = fit_regression(train, "log_linear")
        with pytest.raises(DataError, match="empty"):
            evaluate(model, [])


class TestDistribution:
    def test_hand_binning(self):
        articles = [make_article(i, tweets=t) for i, t in enumerate([1, 1, 10, 100])]
        report = emit_distribution(articles)
        assert report.bin_log10 == [0.0, 1.0, 2.0]
        assert report.counts == [2, 1, 1]
        assert report.zero_count == 0
        # single-integer bins: density equals the raw count
        assert report.points[0] == (0.0, pytest.approx(math.log10(2)))

    def test_all_zero_labels(self):
        articles = [make_article(i, tweets=0) for i in range(5)]
        report = emit_distribution(articles)
        assert report.counts == [] and report.zero_count == 5

    def test_zero_side_channel_and_sum_property(self):
        labels = [0, 1, 2, 3, 0, 17, 240, 2400, 0]
        articles = [make_article(i, tweets=t) for i, t in enumerate(labels)]
        report = emit_distribution(articles)
        assert report.zero_count == 3
        assert sum(report.counts) == len(labels) - 3

    @given(st.lists(st.integers(0, 5000), min_size=1, max_size=300))
    @settings(max_examples=60)
    def test_sum_invariant(self, labels):
        articles = [make_article(i, tweets=t) for i, t in enumerate(labels)]
        report = emit_distribution(articles)
        assert sum(report.counts) == len(labels) - report.zero_count
        assert report.zero_count == labels.count(0)

    def test_unlabeled_fatal(self):
        with pytest.raises(DataError):
            emit_distribution([make_article(1, tweets=None)])

    def test_integer_width_normalization_keeps_slope_honest(self):
        # bins above t ~ 10 hold several integers; the density normalization
        # must remove the resulting count inflation
        rng = np.random.default_rng(3)
        from newspop.synth import sample_power_law

        labels = sample_power_law(rng, 40_000, -2.0, 2400)
        articles = [make_article(i, tweets=int(t)) for i, t in enumerate(labels)]
        report = emit_distribution(articles)
        assert report.slope() == pytest.approx(-2.0, abs=0.15)


class TestRatings:
    def _aggregates(self):
        return {
            "a": SourceAggregate(links=10, tweets=100),
            "b": SourceAggregate(links=20, tweets=60),
            "c": SourceAggregate(links=40, tweets=40),
            "d": SourceAggregate(links=80, tweets=400),
        }

    def test_ratings_proportional_to_links(self):
        aggregates = self._aggregates()
        ratings = [
            ExternalRating(src, aggregates[src].links * 3.0) for src in aggregates
        ]
        cmp = compare_ratings(ratings, aggregates)
        assert cmp.links_correlation == pytest.approx(1.0, abs=1e-12)
        assert cmp.overlap == 4

    def test_overlap_too_small_fatal(self):
        aggregates = self._aggregates()
        ratings = [ExternalRating("a", 1.0), ExternalRating("b", 2.0)]
        with pytest.raises(DataError, match="overlap"):
            compare_ratings(ratings, aggregates)

    def test_normalization_of_source_names(self):
        aggregates = {"Blog Maverick": SourceAggregate(links=5, tweets=890)}
        aggregates.update(self._aggregates())
        ratings = [
            ExternalRating("  blog   maverick ", 5.0),
            ExternalRating("a", 1.0),
            ExternalRating("b", 2.0),
            ExternalRating("c", 3.0),
        ]
        cmp = compare_ratings(ratings, aggregates)
        assert cmp.overlap == 4

    def test_parse_ratings(self, tmp_path):
        path = tmp_path / "r.tsv"
        path.write_text("Reuters\t92.5\nMashable\t17\n# comment\n")
        ratings = parse_ratings(path)
        assert ratings[0] == ExternalRating("reuters", 92.5)
        assert len(ratings) == 2

    def test_parse_ratings_bad_line(self, tmp_path):
        path = tmp_path / "r.tsv"
        path.write_text("just-a-name\n")
        with pytest.raises(DataError, match="ratings line"):
            parse_ratings(path)


class TestEmitReport:
    def _report(self):
        return EvalReport(
            r_squared_log_space=0.34,
            accuracy=0.84,
            confusion={"A": {"A": 5, "B": 1}, "B": {"A": 2, "B": 4}},
            ablation={"all": 0.84, "-source": 0.7},
            window_sweep=[(14, 0.5), (54, 0.7)],
            notes=["fingerprint=abc123"],
        )

    def test_json_round_trip(self, tmp_path):
        report = self._report()
        path = tmp_path / "report.json"
        emit_report(report, path, format="json")
        parsed = EvalReport.from_record(json.loads(path.read_text()))
        assert parsed == report

    def test_byte_stable(self, tmp_path):
        report = self._report()
        p1, p2 = tmp_path / "a.json", tmp_path / "b.json"
        emit_report(report, p1)
        emit_report(report, p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_csv_bundle_one_file_per_field(self, tmp_path):
        report = self._report()
        out = tmp_path / "bundle"
        files = emit_report(report, out, format="csv-bundle")
        names = {f.split("/")[-1] for f in files}
        assert names == {
            "summary.csv", "confusion.csv", "ablation.csv", "window_sweep.csv", "notes.csv",
        }
        again = tmp_path / "bundle2"
        files2 = emit_report(report, again, format="csv-bundle")
        for f1, f2 in zip(sorted(files), sorted(files2)):
            assert open(f1, "rb").read() == open(f2, "rb").read()

    def test_unknown_format(self, tmp_path):
        with pytest.raises(DataError, match="format"):
            emit_report(self._report(), tmp_path / "x", format="yaml")
