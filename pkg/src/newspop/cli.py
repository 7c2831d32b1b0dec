"""Command-line entrypoint orchestrating the full pipeline.

Subcommands: synth, ingest, build-scores, train, evaluate, predict, serve.
Exit codes: 0 success, 1 usage error, 2 data error. All randomness is
controlled by --seed; rerunning a subcommand with identical inputs and
seed reproduces its output files byte for byte.

A config file (key = value per line, keys matching flag names) can stand
in for any flag; flags given on the command line win.
"""

from __future__ import annotations

import argparse
import importlib.resources
import os
import sys
from datetime import date

from . import artifacts, corpus, evaluation, scoring, synth, textfeat
from .errors import DataError
from .models import (
    ClassScheme,
    KnnConfig,
    ablate_features,
    assign_class,
    cross_validate,
    fit_classifier,
    fit_regression,
    zero_tweet_label,
)
from .models.regression import KnnModel, RegressionModel, fit_knn
from .models.validation import NONZERO, ZERO


def _bundled_data(name: str) -> str:
    return str(importlib.resources.files("newspop").joinpath("data", name))


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; the contract here is 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _parse_ratio(text: str) -> tuple[float, float, float]:
    parts = [p for p in text.split(",") if p.strip()]
    if len(parts) != 3:
        raise DataError(f"ratio must have 3 components, got {text!r}")
    return tuple(float(p) for p in parts)  # type: ignore[return-value]


def _parse_int_list(text: str) -> list[int]:
    return [int(p) for p in text.split(",") if p.strip()]


def _parse_float_list(text: str) -> list[float]:
    return [float(p) for p in text.split(",") if p.strip()]


def _onoff(value: str) -> bool:
    if value not in ("on", "off"):
        raise argparse.ArgumentTypeError(f"expected on|off, got {value!r}")
    return value == "on"


def load_config_tokens(path) -> list[str]:
    """Turn a key = value config file into argv tokens."""
    tokens = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise DataError(f"bad config line {lineno}: expected key = value")
            key, value = line.split("=", 1)
            flag = "--" + key.strip().replace("_", "-")
            tokens += [flag, value.strip()]
    return tokens


MODEL_CHOICES = ("log-linear", "power", "knn", "nb", "tree", "bagging", "linear-margin")
_ALGORITHM_BY_FLAG = {
    "nb": "naive_bayes",
    "tree": "decision_tree",
    "bagging": "bagging",
    "linear-margin": "linear_margin",
}


def _load_articles(path, what: str) -> list[corpus.Article]:
    articles, errors = corpus.parse_articles(path)
    if errors:
        print(f"{what}: {len(errors)} malformed lines skipped", file=sys.stderr)
    return articles


def _load_stage(args) -> scoring.FeatureStage:
    return artifacts.load_stage(args.stage)


def _assemble_pairs(stage, articles):
    return [(stage.assemble(a), a.tweets) for a in articles]


def _labeled_subset(pairs, scheme):
    """(fv, class label) for articles with at least one tweet."""
    return [
        (fv, assign_class(t, scheme))
        for fv, t in pairs
        if t is not None and t >= 1
    ]


# ----------------------------------------------------------------- synth


def cmd_synth(args) -> int:
    cfg = synth.SynthConfig(
        seed=args.seed,
        n_articles=args.n_articles,
        n_sources=args.n_sources,
        n_categories=args.n_categories,
        n_entities=args.n_entities,
        as_of=date.fromisoformat(args.as_of),
        publish_days=args.publish_days,
        source_rate_log_mu=args.source_rate_mu,
        source_rate_log_sigma=args.source_rate_sigma,
        links_per_day=args.links_per_day,
        history_days=args.history_days,
        history_noise=args.history_noise,
        entity_rate_log_mu=args.entity_rate_mu,
        entity_rate_log_sigma=args.entity_rate_sigma,
        category_log_mu=args.category_mu,
        category_log_sigma=args.category_sigma,
        label_model=args.label_model.replace("-", "_"),
        label_noise_sigma=args.label_noise,
        tail_exponent=args.tail_exponent,
        tail_max=args.tail_max,
        zero_fraction=args.zero_fraction,
        zero_threshold=args.zero_threshold,
        zero_noise=args.zero_noise,
        spam_fraction=args.spam_fraction,
        window_days=args.window,
        ema_alpha=args.alpha,
        consistency_weighting=args.weighting,
    )
    truth = synth.generate(cfg, args.out)
    print(
        f"wrote {cfg.n_articles} articles ({truth['n_spam']} spam), "
        f"{cfg.n_sources} sources, {cfg.n_entities} entities -> {args.out}"
    )
    return 0


# ---------------------------------------------------------------- ingest


def cmd_ingest(args) -> int:
    articles, errors = corpus.parse_articles(args.articles)
    rules = corpus.CleanConfig(
        min_title_tokens=args.min_title_tokens,
        host_blocklist=frozenset(
            corpus.normalize_key(h) for h in args.blocklist.split(",") if h.strip()
        ),
    )
    cleaned, report = corpus.clean(articles, rules)
    ratio = _parse_ratio(args.ratio)
    part = corpus.split(cleaned, ratio, seed=args.seed)
    os.makedirs(args.out, exist_ok=True)
    corpus.write_articles(part.scoring_set, os.path.join(args.out, "scoring.jsonl"))
    corpus.write_articles(part.train_set, os.path.join(args.out, "train.jsonl"))
    corpus.write_articles(part.test_set, os.path.join(args.out, "test.jsonl"))
    config_fp = artifacts.fingerprint_bytes(
        artifacts.canonical_json(
            [
                artifacts.fingerprint_file(args.articles),
                list(ratio),
                args.seed,
                args.min_title_tokens,
                sorted(rules.host_blocklist),
            ]
        ).encode()
    )
    artifacts.write_json(
        {
            "config_fingerprint": config_fp,
            "parse_errors": [{"line": e.line, "reason": e.reason} for e in errors],
            "input_count": report.input_count,
            "output_count": report.output_count,
            "duplicates": report.duplicates,
            "short_title": report.short_title,
            "blocked_host": report.blocked_host,
            "ratio": list(ratio),
            "seed": args.seed,
            "sizes": {
                "scoring": len(part.scoring_set),
                "train": len(part.train_set),
                "test": len(part.test_set),
            },
        },
        os.path.join(args.out, "clean_report.json"),
    )
    print(
        f"parsed {len(articles)} (+{len(errors)} rejected), cleaned to "
        f"{report.output_count}, split {len(part.scoring_set)}/"
        f"{len(part.train_set)}/{len(part.test_set)} -> {args.out}"
    )
    return 0


# ----------------------------------------------------------- build-scores


def cmd_build_scores(args) -> int:
    scoring_set = _load_articles(args.scoring, "scoring set")
    if not scoring_set:
        raise DataError("scoring set is empty")
    history = corpus.parse_history(args.history)
    as_of = (
        date.fromisoformat(args.as_of)
        if args.as_of
        else min(a.published_at for a in scoring_set).date()
    )
    cfg = scoring.ScoringConfig(
        window_days=args.window,
        ema_alpha=args.alpha,
        consistency_weighting=args.weighting,
    )
    source_table = scoring.build_source_scores(
        [r for r in history if r.kind == "source"], cfg, as_of=as_of
    )
    category_table = scoring.build_category_scores(scoring_set)
    entity_table = scoring.build_entity_scores(
        [r for r in history if r.kind == "entity"],
        scoring.ScoringConfig(window_days=args.entity_window),
        as_of=as_of,
    )
    docs = textfeat.load_labeled_docs(args.subjectivity_docs)
    subjectivity = textfeat.train_subjectivity(docs, smoothing=args.smoothing)
    gazetteer = textfeat.load_gazetteer(args.gazetteer)
    stage = scoring.FeatureStage(
        source_table, category_table, entity_table, subjectivity, gazetteer
    )
    manifest = artifacts.write_stage(stage, args.out)

    if args.sweep:
        windows = _parse_int_list(args.sweep)
        labels = {
            key: agg.t_density
            for key, agg in corpus.aggregate_by_source(scoring_set).items()
            if agg.links > 0
        }
        points = scoring.sweep_history_window(
            [r for r in history if r.kind == "source"], labels, windows, as_of=as_of
        )
        sweep_path = os.path.join(args.out, "sweep.csv")
        with open(sweep_path, "w", encoding="utf-8") as fh:
            fh.write("window_days,correlation\n")
            for window, r in points:
                fh.write(f"{window},{r!r}\n")
        print(f"sweep: {points}")
    print(
        f"stage written to {args.out} "
        f"(features_fingerprint={manifest['features_fingerprint']})"
    )
    return 0


# ----------------------------------------------------------------- train


def _classifier_params(args) -> dict:
    if args.model == "tree":
        return {"max_depth": args.max_depth, "min_leaf": args.min_leaf}
    if args.model == "bagging":
        return {
            "n_trees": args.n_trees,
            "max_depth": args.max_depth,
            "min_leaf": args.min_leaf,
        }
    if args.model == "linear-margin":
        return {"epochs": args.epochs, "lr0": args.lr, "reg": args.reg}
    if args.model == "nb":
        return {"var_floor": args.var_floor}
    return {}


def cmd_train(args) -> int:
    stage = _load_stage(args)
    train_articles = _load_articles(args.train, "train set")
    if not train_articles:
        raise DataError("training set is empty")
    pairs = _assemble_pairs(stage, train_articles)
    if any(t is None for _, t in pairs):
        raise DataError("training articles must carry tweets labels")
    trained_at = corpus.format_timestamp(
        max(a.published_at for a in train_articles)
    )
    features_fp = artifacts.stage_fingerprint(args.stage)
    scheme = ClassScheme(
        boundaries=tuple(_parse_float_list(args.boundaries)),
        labels=tuple(args.labels.split(",")),
    )

    if args.zero_tweet:
        if args.model in ("log-linear", "power", "knn"):
            raise DataError("--zero-tweet needs a classification model")
        labeled = [(fv, zero_tweet_label(t)) for fv, t in pairs]
        if {lab for _, lab in labeled} != {ZERO, NONZERO}:
            raise DataError("zero-tweet training needs both zero and nonzero articles")
        model = fit_classifier(
            labeled,
            _ALGORITHM_BY_FLAG[args.model],
            _classifier_params(args),
            seed=args.seed,
            log_scores=args.log_scores,
        )
        role = "zero_tweet"
    elif args.model in ("log-linear", "power"):
        positive = [(fv, float(t)) for fv, t in pairs if t >= 1]
        form = "log_linear" if args.model == "log-linear" else "power_transform"
        model = fit_regression(positive, form, power_exponent=args.power_exponent)
        role = "regression"
    elif args.model == "knn":
        positive = [(fv, float(t)) for fv, t in pairs if t >= 1]
        model = fit_knn(positive, KnnConfig(k=args.knn_k))
        role = "regression"
    else:
        labeled = _labeled_subset(pairs, scheme)
        model = fit_classifier(
            labeled,
            _ALGORITHM_BY_FLAG[args.model],
            _classifier_params(args),
            seed=args.seed,
            scheme=scheme,
            log_scores=args.log_scores,
        )
        role = "classifier"

    out = args.out or os.path.join(args.stage, f"{role}.json")
    artifacts.save_model(model, out, trained_at=trained_at, features_fingerprint=features_fp)
    if os.path.dirname(os.path.abspath(out)) == os.path.abspath(args.stage):
        artifacts.write_manifest(args.stage)
    print(f"trained {args.model} ({role}) on {len(pairs)} articles -> {out}")
    return 0


# -------------------------------------------------------------- evaluate


def cmd_evaluate(args) -> int:
    stage = _load_stage(args)
    stage_fp = artifacts.stage_fingerprint(args.stage)
    scheme = ClassScheme(
        boundaries=tuple(_parse_float_list(args.boundaries)),
        labels=tuple(args.labels.split(",")),
    )
    algorithm = _ALGORITHM_BY_FLAG.get(args.algorithm, args.algorithm)
    report = evaluation.EvalReport()
    report.notes.append(f"features_fingerprint={stage_fp}")

    if args.ablate or args.zero_tweet:
        if not args.data:
            raise DataError("--ablate/--zero-tweet need --data with labeled articles")
        articles = _load_articles(args.data, "data set")
        pairs = _assemble_pairs(stage, articles)
        if args.zero_tweet:
            labeled = [(fv, zero_tweet_label(t)) for fv, t in pairs]
            cv = cross_validate(labeled, algorithm, k=args.k, seed=args.seed)
            report.accuracy = cv.pooled_accuracy
            report.confusion = cv.confusion
            report.notes.append(
                f"zero-tweet {algorithm} {args.k}-fold cv, seed={args.seed}, n={cv.n}"
            )
        else:
            labeled = _labeled_subset(pairs, scheme)
            rows = ablate_features(labeled, algorithm, k=args.k, seed=args.seed)
            report.ablation = dict(rows)
            report.accuracy = rows[0][1]
            report.notes.append(
                f"ablation {algorithm} {args.k}-fold cv, seed={args.seed}, "
                f"n={len(labeled)} (zero-tweet excluded)"
            )
    elif args.category_only:
        if not args.train or not args.test:
            raise DataError("--category-only needs --train and --test")
        wanted = corpus.normalize_key(args.category_only)
        train_arts = [
            a
            for a in _load_articles(args.train, "train set")
            if corpus.normalize_key(a.category) == wanted
        ]
        test_arts = [
            a
            for a in _load_articles(args.test, "test set")
            if corpus.normalize_key(a.category) == wanted
        ]
        if not train_arts or not test_arts:
            raise DataError(f"category {args.category_only!r} not present in both sets")
        form = "log_linear" if args.form == "log-linear" else "power_transform"
        train_pairs = [
            (fv, float(t))
            for fv, t in _assemble_pairs(stage, train_arts)
            if t is not None and t >= 1
        ]
        test_pairs = [
            (fv, float(t))
            for fv, t in _assemble_pairs(stage, test_arts)
            if t is not None and t >= 1
        ]
        # within one category the C column is constant; fit the reduced form
        model = fit_regression(
            train_pairs, form, power_exponent=args.power_exponent,
            include_category=False,
        )
        sub = evaluation.evaluate(model, test_pairs)
        report.r_squared_log_space = sub.r_squared_log_space
        report.r_squared_raw = sub.r_squared_raw
        report.mse_raw = sub.mse_raw
        report.notes += sub.notes
        report.notes.append(
            f"category-only={wanted}, train n={len(train_pairs)}, test n={len(test_pairs)}"
        )
    else:
        if not args.model or not args.test:
            raise DataError("evaluate needs --model and --test (or a mode flag)")
        model = artifacts.load_model(args.model)
        test_articles = _load_articles(args.test, "test set")
        pairs = _assemble_pairs(stage, test_articles)
        if isinstance(model, (RegressionModel, KnnModel)):
            kept = [(fv, float(t)) for fv, t in pairs if t is not None and t >= 1]
            skipped = len(pairs) - len(kept)
            sub = evaluation.evaluate(model, kept)
            if skipped:
                sub.notes.append(f"excluded {skipped} zero-tweet articles")
        else:
            labeled = _labeled_subset(pairs, model.scheme or scheme)
            sub = evaluation.evaluate(model, labeled)
        report.r_squared_log_space = sub.r_squared_log_space
        report.r_squared_raw = sub.r_squared_raw
        report.mse_raw = sub.mse_raw
        report.accuracy = sub.accuracy
        report.confusion = sub.confusion
        report.notes += sub.notes

    files = evaluation.emit_report(report, args.out, format=args.format)
    print(f"report -> {', '.join(files)}")
    return 0


# --------------------------------------------------------------- predict


def cmd_predict(args) -> int:
    from .service import PredictRequest, predict_article

    bundle = artifacts.load_bundle(args.bundle)
    if args.file:
        request = PredictRequest.from_record(artifacts.read_json(args.file))
    else:
        request = PredictRequest.from_record(
            {
                "title": args.title,
                "summary": args.summary,
                "source": args.source,
                "category": args.category,
            }
        )
    response = predict_article(bundle, request)
    if args.format == "json":
        text = artifacts.canonical_json(response.to_record())
    else:
        lines = [
            f"predicted class:       {response.predicted_class}",
            f"regression estimate:   {response.regression_estimate:.3f} tweets",
            f"zero-tweet probability:{response.zero_tweet_probability: .3f}",
            "class distribution:    "
            + ", ".join(
                f"{c}={p:.3f}" for c, p in sorted(response.class_distribution.items())
            ),
            "features:              "
            + ", ".join(f"{k}={v:.4g}" for k, v in response.features.items()),
            f"model fingerprint:     {response.model_fingerprint}",
        ]
        text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


# ----------------------------------------------------------------- serve


def cmd_serve(args) -> int:
    from .service import serve

    host, _, port = args.bind.rpartition(":")
    if not host or not port.isdigit():
        raise DataError(f"bad --bind {args.bind!r}, expected host:port")
    server = serve(args.bundle, host, int(port))
    print(f"serving bundle {args.bundle} on http://{host}:{server.server_address[1]}/")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        server.shutdown()
    return 0


# ---------------------------------------------------------------- parser


def build_parser() -> _Parser:
    parser = _Parser(prog="newspop", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    default_cfg = synth.SynthConfig()

    def common(p):
        p.add_argument("--seed", type=int, default=0, help="master random seed")
        p.add_argument("--config", help="key = value config file; flags win")

    p = sub.add_parser("synth", help="generate a synthetic corpus with ground truth")
    common(p)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--n-articles", type=int, default=default_cfg.n_articles)
    p.add_argument("--n-sources", type=int, default=default_cfg.n_sources)
    p.add_argument("--n-categories", type=int, default=default_cfg.n_categories)
    p.add_argument("--n-entities", type=int, default=default_cfg.n_entities)
    p.add_argument("--as-of", default=default_cfg.as_of.isoformat())
    p.add_argument("--publish-days", type=int, default=default_cfg.publish_days)
    p.add_argument("--source-rate-mu", type=float, default=default_cfg.source_rate_log_mu)
    p.add_argument("--source-rate-sigma", type=float, default=default_cfg.source_rate_log_sigma)
    p.add_argument("--links-per-day", type=int, default=default_cfg.links_per_day)
    p.add_argument("--history-days", type=int, default=default_cfg.history_days)
    p.add_argument("--history-noise", type=_onoff, default=default_cfg.history_noise,
                   help="on|off: Poisson day-to-day noise in history")
    p.add_argument("--entity-rate-mu", type=float, default=default_cfg.entity_rate_log_mu)
    p.add_argument("--entity-rate-sigma", type=float, default=default_cfg.entity_rate_log_sigma)
    p.add_argument("--category-mu", type=float, default=default_cfg.category_log_mu)
    p.add_argument("--category-sigma", type=float, default=default_cfg.category_log_sigma)
    p.add_argument("--label-model", choices=("planted-regression", "power-law"),
                   default="planted-regression")
    p.add_argument("--label-noise", type=float, default=default_cfg.label_noise_sigma)
    p.add_argument("--tail-exponent", type=float, default=default_cfg.tail_exponent)
    p.add_argument("--tail-max", type=int, default=default_cfg.tail_max)
    p.add_argument("--zero-fraction", type=float, default=default_cfg.zero_fraction)
    p.add_argument("--zero-threshold", type=float, default=default_cfg.zero_threshold)
    p.add_argument("--zero-noise", type=float, default=default_cfg.zero_noise)
    p.add_argument("--spam-fraction", type=float, default=default_cfg.spam_fraction)
    p.add_argument("--window", type=int, default=default_cfg.window_days)
    p.add_argument("--alpha", type=float, default=default_cfg.ema_alpha)
    p.add_argument("--weighting", type=_onoff, default=default_cfg.consistency_weighting,
                   help="on|off: consistency weighting of source scores")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("ingest", help="parse, clean, and split an article corpus")
    common(p)
    p.add_argument("--articles", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--ratio", default="0.5,0.25,0.25")
    p.add_argument("--min-title-tokens", type=int, default=3)
    p.add_argument("--blocklist", default="", help="comma-separated url hosts to drop")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("build-scores", help="build score tables and the feature stage")
    common(p)
    p.add_argument("--scoring", required=True, help="scoring partition (labeled)")
    p.add_argument("--history", required=True)
    p.add_argument("--out", required=True, help="stage/bundle directory")
    p.add_argument("--gazetteer", default=_bundled_data("gazetteer.tsv"))
    p.add_argument("--subjectivity-docs", default=_bundled_data("labeled_docs.jsonl"))
    p.add_argument("--smoothing", type=float, default=1.0)
    p.add_argument("--window", type=int, default=54)
    p.add_argument("--alpha", type=float, default=0.3)
    p.add_argument("--weighting", type=_onoff, default=True)
    p.add_argument("--entity-window", type=int, default=30)
    p.add_argument("--as-of", default=None, help="default: first scoring-set date")
    p.add_argument("--sweep", default=None,
                   help="comma-separated windows; also writes sweep.csv")
    p.set_defaults(func=cmd_build_scores)

    p = sub.add_parser("train", help="fit a regression or classification model")
    common(p)
    p.add_argument("--train", required=True)
    p.add_argument("--stage", required=True)
    p.add_argument("--model", required=True, choices=MODEL_CHOICES)
    p.add_argument("--out", default=None, help="default: <stage>/<role>.json")
    p.add_argument("--zero-tweet", action="store_true",
                   help="binary zero/nonzero target instead of classes")
    p.add_argument("--power-exponent", type=float, default=0.45)
    p.add_argument("--knn-k", type=int, default=7)
    p.add_argument("--boundaries", default="20,100")
    p.add_argument("--labels", default="A,B,C")
    p.add_argument("--log-scores", type=_onoff, default=True,
                   help="on|off: classifiers see ln S and ln C")
    p.add_argument("--max-depth", type=int, default=12)
    p.add_argument("--min-leaf", type=int, default=5)
    p.add_argument("--n-trees", type=int, default=10)
    p.add_argument("--epochs", type=int, default=30)
    p.add_argument("--lr", type=float, default=0.5)
    p.add_argument("--reg", type=float, default=1e-4)
    p.add_argument("--var-floor", type=float, default=1e-9)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="evaluate a model or run CV studies")
    common(p)
    p.add_argument("--stage", required=True)
    p.add_argument("--model", default=None, help="model artifact to evaluate")
    p.add_argument("--test", default=None)
    p.add_argument("--data", default=None, help="labeled data for --ablate/--zero-tweet")
    p.add_argument("--train", default=None, help="train set for --category-only")
    p.add_argument("--ablate", action="store_true")
    p.add_argument("--zero-tweet", action="store_true")
    p.add_argument("--category-only", default=None, metavar="NAME")
    p.add_argument("--form", choices=("log-linear", "power"), default="log-linear")
    p.add_argument("--algorithm", default="tree",
                   choices=("nb", "tree", "bagging", "linear-margin"))
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--power-exponent", type=float, default=0.45)
    p.add_argument("--boundaries", default="20,100")
    p.add_argument("--labels", default="A,B,C")
    p.add_argument("--out", default="report.json")
    p.add_argument("--format", choices=("json", "csv-bundle"), default="json")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("predict", help="predict one draft article")
    common(p)
    p.add_argument("--bundle", required=True)
    p.add_argument("--title", default="")
    p.add_argument("--summary", default="")
    p.add_argument("--source", default="")
    p.add_argument("--category", default="")
    p.add_argument("--file", default=None, help="JSON file with request fields")
    p.add_argument("--format", choices=("json", "text"), default="text")
    p.add_argument("--out", default=None, help="write instead of stdout")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("serve", help="serve a bundle over HTTP")
    common(p)
    p.add_argument("--bundle", required=True)
    p.add_argument("--bind", default="127.0.0.1:8787")
    p.set_defaults(func=cmd_serve)

    return parser


def _apply_config(argv: list[str]) -> list[str]:
    """Insert config-file tokens right after the subcommand; flags win."""
    if "--config" not in argv:
        return argv
    idx = argv.index("--config")
    if idx + 1 >= len(argv):
        return argv  # argparse will report the missing value
    tokens = load_config_tokens(argv[idx + 1])
    return argv[:1] + tokens + argv[1:]


def main(argv=None) -> int:
    raw = list(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(_apply_config(raw))
    except SystemExit as exc:
        return int(exc.code or 0)
    except (DataError, OSError) as exc:  # unreadable or malformed --config
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
