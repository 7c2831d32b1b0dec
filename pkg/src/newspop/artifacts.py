"""Serialization of trained models and feature-stage bundles.

A bundle directory holds everything the prediction service needs:

  source_scores.json, category_scores.json, entity_scores.json,
  subjectivity.json, gazetteer.tsv,          <- the feature stage
  regression.json, classifier.json, zero_tweet.json,
  manifest.json                              <- content hashes

Every model artifact records the fingerprint of the feature stage it was
trained against; loading refuses bundles whose parts do not agree.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass

from .errors import DataError
from .models.classifiers import (
    Bagging,
    CartTree,
    ClassScheme,
    ClassifierModel,
    GaussianNB,
    LinearMargin,
    Standardizer,
)
from .models.regression import FitStats, KnnModel, RegressionModel
from .scoring import FeatureStage, ScoreTable
from .textfeat import SubjectivityModel, load_gazetteer, write_gazetteer

import numpy as np

ARTIFACT_VERSION = 1
MANIFEST_VERSION = 1

STAGE_FILES = (
    "source_scores.json",
    "category_scores.json",
    "entity_scores.json",
    "subjectivity.json",
    "gazetteer.tsv",
)
MODEL_FILES = ("regression.json", "classifier.json", "zero_tweet.json")


def fingerprint_bytes(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()[:16]


def fingerprint_file(path) -> str:
    with open(path, "rb") as fh:
        return fingerprint_bytes(fh.read())


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def write_json(obj, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(canonical_json(obj))


def read_json(path) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


_INNER_TYPES = {
    "naive_bayes": GaussianNB,
    "decision_tree": CartTree,
    "bagging": Bagging,
    "linear_margin": LinearMargin,
}


def regression_record(
    model: RegressionModel, trained_at: str = "", features_fingerprint: str = ""
) -> dict:
    return {
        "version": ARTIFACT_VERSION,
        "kind": "regression",
        "algorithm": model.form,
        "parameters": {
            "coefficients": model.coefficients,
            "power_exponent": model.power_exponent,
        },
        "fit_stats": vars(model.fit_stats),
        "standardization": None,
        "class_scheme": None,
        "seed": None,
        "train_fingerprint": model.train_fingerprint,
        "features_fingerprint": features_fingerprint,
        "config_fingerprint": fingerprint_bytes(
            canonical_json([model.form, model.power_exponent, features_fingerprint]).encode()
        ),
        "trained_at": trained_at,
    }


def knn_record(
    model: KnnModel, trained_at: str = "", features_fingerprint: str = ""
) -> dict:
    return {
        "version": ARTIFACT_VERSION,
        "kind": "knn",
        "algorithm": "knn",
        "parameters": {"k": model.k},
        "standardization": {
            "means": model.means.tolist(),
            "sds": model.sds.tolist(),
            "kept": list(model.kept),
        },
        "train_data": {"X": model.X.tolist(), "y": model.y.tolist()},
        "class_scheme": None,
        "seed": None,
        "train_fingerprint": model.train_fingerprint,
        "features_fingerprint": features_fingerprint,
        "config_fingerprint": fingerprint_bytes(
            canonical_json(["knn", model.k, features_fingerprint]).encode()
        ),
        "trained_at": trained_at,
    }


def classifier_record(
    model: ClassifierModel, trained_at: str = "", features_fingerprint: str = ""
) -> dict:
    return {
        "version": ARTIFACT_VERSION,
        "kind": "classifier",
        "algorithm": model.algorithm,
        "parameters": {
            "params": model.params,
            "inner": model.inner.to_record(),
            "classes": model.classes,
            "feature_indices": list(model.feature_indices),
            "log_scores": model.log_scores,
        },
        "standardization": {
            "means": model.standardizer.means.tolist(),
            "sds": model.standardizer.sds.tolist(),
            "kept": list(model.standardizer.kept),
            "dropped": list(model.standardizer.dropped),
        },
        "class_scheme": model.scheme.to_record() if model.scheme else None,
        "seed": model.seed,
        "train_fingerprint": model.train_fingerprint,
        "features_fingerprint": features_fingerprint,
        "config_fingerprint": fingerprint_bytes(
            canonical_json(
                [model.algorithm, model.params, model.seed, features_fingerprint]
            ).encode()
        ),
        "trained_at": trained_at,
    }


def model_from_record(rec: dict):
    if rec.get("version") != ARTIFACT_VERSION:
        raise DataError(f"unsupported artifact version {rec.get('version')!r}")
    kind = rec.get("kind")
    if kind == "regression":
        stats = rec.get("fit_stats") or {}
        return RegressionModel(
            form=rec["algorithm"],
            coefficients=dict(rec["parameters"]["coefficients"]),
            fit_stats=FitStats(**stats),
            power_exponent=rec["parameters"].get("power_exponent"),
            train_fingerprint=rec.get("train_fingerprint", ""),
        )
    if kind == "knn":
        std = rec["standardization"]
        return KnnModel(
            k=rec["parameters"]["k"],
            means=np.array(std["means"]),
            sds=np.array(std["sds"]),
            kept=list(std["kept"]),
            X=np.array(rec["train_data"]["X"]),
            y=np.array(rec["train_data"]["y"]),
            train_fingerprint=rec.get("train_fingerprint", ""),
        )
    if kind == "classifier":
        params = rec["parameters"]
        algorithm = rec["algorithm"]
        if algorithm not in _INNER_TYPES:
            raise DataError(f"unknown classifier algorithm {algorithm!r}")
        std = rec["standardization"]
        return ClassifierModel(
            algorithm=algorithm,
            classes=list(params["classes"]),
            standardizer=Standardizer(
                means=np.array(std["means"]),
                sds=np.array(std["sds"]),
                kept=list(std["kept"]),
                dropped=list(std["dropped"]),
            ),
            inner=_INNER_TYPES[algorithm].from_record(params["inner"]),
            params=dict(params["params"]),
            seed=rec.get("seed") or 0,
            scheme=ClassScheme.from_record(rec["class_scheme"])
            if rec.get("class_scheme")
            else None,
            feature_indices=tuple(params["feature_indices"]),
            log_scores=params.get("log_scores", False),
            train_fingerprint=rec.get("train_fingerprint", ""),
        )
    raise DataError(f"unknown artifact kind {kind!r}")


def save_model(model, path, trained_at: str = "", features_fingerprint: str = "") -> None:
    if isinstance(model, RegressionModel):
        rec = regression_record(model, trained_at, features_fingerprint)
    elif isinstance(model, KnnModel):
        rec = knn_record(model, trained_at, features_fingerprint)
    elif isinstance(model, ClassifierModel):
        rec = classifier_record(model, trained_at, features_fingerprint)
    else:
        raise DataError(f"cannot serialize model of type {type(model).__name__}")
    write_json(rec, path)


def load_model(path):
    return model_from_record(read_json(path))


def save_subjectivity(model: SubjectivityModel, path) -> None:
    write_json(model.to_record(), path)


def load_subjectivity(path) -> SubjectivityModel:
    return SubjectivityModel.from_record(read_json(path))


def stage_fingerprint(bundle_dir) -> str:
    """Fingerprint of the five feature-stage files, in fixed order."""
    h = hashlib.sha256()
    for name in STAGE_FILES:
        path = os.path.join(bundle_dir, name)
        if not os.path.exists(path):
            raise DataError(f"bundle is missing stage file {name}")
        h.update(name.encode())
        h.update(b"\x00")
        h.update(fingerprint_file(path).encode())
        h.update(b"\x01")
    return h.hexdigest()[:16]


def write_manifest(bundle_dir) -> dict:
    """Record content hashes for every known bundle file present."""
    files = {}
    for name in STAGE_FILES + MODEL_FILES:
        path = os.path.join(bundle_dir, name)
        if os.path.exists(path):
            files[name] = fingerprint_file(path)
    manifest = {
        "version": MANIFEST_VERSION,
        "files": files,
        "features_fingerprint": stage_fingerprint(bundle_dir),
    }
    write_json(manifest, os.path.join(bundle_dir, "manifest.json"))
    return manifest


def write_stage(stage: FeatureStage, bundle_dir) -> dict:
    os.makedirs(bundle_dir, exist_ok=True)
    stage.source_table.save(os.path.join(bundle_dir, "source_scores.json"))
    stage.category_table.save(os.path.join(bundle_dir, "category_scores.json"))
    stage.entity_table.save(os.path.join(bundle_dir, "entity_scores.json"))
    save_subjectivity(stage.subjectivity, os.path.join(bundle_dir, "subjectivity.json"))
    write_gazetteer(stage.gazetteer, os.path.join(bundle_dir, "gazetteer.tsv"))
    return write_manifest(bundle_dir)


def load_stage(bundle_dir) -> FeatureStage:
    return FeatureStage(
        source_table=ScoreTable.load(os.path.join(bundle_dir, "source_scores.json")),
        category_table=ScoreTable.load(os.path.join(bundle_dir, "category_scores.json")),
        entity_table=ScoreTable.load(os.path.join(bundle_dir, "entity_scores.json")),
        subjectivity=load_subjectivity(os.path.join(bundle_dir, "subjectivity.json")),
        gazetteer=load_gazetteer(os.path.join(bundle_dir, "gazetteer.tsv")),
    )


@dataclass
class Bundle:
    stage: FeatureStage
    regression: RegressionModel | KnnModel
    classifier: ClassifierModel
    zero_model: ClassifierModel
    manifest: dict
    fingerprint: str  # of the manifest content
    model_records: dict = None  # raw artifact JSON, for metadata echo


def load_bundle(bundle_dir) -> Bundle:
    """Load and verify a complete bundle; refuses inconsistent fingerprints."""
    manifest_path = os.path.join(bundle_dir, "manifest.json")
    if not os.path.exists(manifest_path):
        raise DataError(f"bundle {bundle_dir} has no manifest.json")
    manifest = read_json(manifest_path)
    for name, recorded in manifest.get("files", {}).items():
        path = os.path.join(bundle_dir, name)
        if not os.path.exists(path):
            raise DataError(f"manifest lists missing file {name}")
        actual = fingerprint_file(path)
        if actual != recorded:
            raise DataError(
                f"fingerprint mismatch for {name}: manifest {recorded}, file {actual}"
            )
    for name in STAGE_FILES + MODEL_FILES:
        if name not in manifest.get("files", {}):
            raise DataError(f"bundle is incomplete: {name} not in manifest")

    features_fp = manifest.get("features_fingerprint", "")
    if features_fp != stage_fingerprint(bundle_dir):
        raise DataError("feature stage does not match the manifest fingerprint")

    models = {}
    records = {}
    for name in MODEL_FILES:
        rec = read_json(os.path.join(bundle_dir, name))
        got = rec.get("features_fingerprint", "")
        if got and got != features_fp:
            raise DataError(
                f"{name} was trained against a different feature stage "
                f"({got} != {features_fp})"
            )
        models[name] = model_from_record(rec)
        records[name.removesuffix(".json")] = rec

    zero_model = models["zero_tweet.json"]
    if not isinstance(zero_model, ClassifierModel) or set(zero_model.classes) != {
        "zero",
        "nonzero",
    }:
        raise DataError("zero_tweet.json is not a binary zero/nonzero classifier")
    classifier = models["classifier.json"]
    if not isinstance(classifier, ClassifierModel):
        raise DataError("classifier.json is not a classifier artifact")

    with open(manifest_path, "rb") as fh:
        bundle_fp = fingerprint_bytes(fh.read())
    return Bundle(
        stage=load_stage(bundle_dir),
        regression=models["regression.json"],
        classifier=classifier,
        zero_model=zero_model,
        manifest=manifest,
        fingerprint=bundle_fp,
        model_records=records,
    )
