"""HTTP prediction service over a trained bundle.

The bundle is loaded once at startup and shared read-only by all request
handlers; there is no cross-request mutable state. The response body is
produced by the same library pipeline (assemble_features -> predict)
that offline evaluation uses.

  POST /v1/predict     PredictRequest JSON -> PredictResponse JSON
  GET  /v1/model       bundle metadata
  GET  /v1/sources     known source keys + scores
  GET  /v1/categories  known category keys + scores
  GET  /healthz        200 "ok"
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from datetime import datetime, timezone
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Optional

from .artifacts import Bundle, load_bundle
from .corpus import Article
from .errors import DataError
from .models.regression import KnnModel, predict_regression

_PLACEHOLDER_TS = datetime(2000, 1, 1, tzinfo=timezone.utc)


@dataclass
class PredictRequest:
    title: str = ""
    summary: str = ""
    source: str = ""
    category: str = ""

    def validate(self) -> None:
        if not self.title.strip() and not self.summary.strip():
            raise RequestError("title", "title or summary must be non-empty")
        if not self.source.strip():
            raise RequestError("source", "source must be a non-empty string")
        if not self.category.strip():
            raise RequestError("category", "category must be a non-empty string")

    @classmethod
    def from_record(cls, rec: dict) -> "PredictRequest":
        if not isinstance(rec, dict):
            raise RequestError(None, "request body must be a JSON object")
        known = {"title", "summary", "source", "category"}
        for key in rec:
            if key not in known:
                raise RequestError(key, f"unknown field {key!r}")
        for key in known:
            if key in rec and not isinstance(rec[key], str):
                raise RequestError(key, f"field {key!r} must be a string")
        req = cls(**{k: rec.get(k, "") for k in known})
        req.validate()
        return req


class RequestError(DataError):
    def __init__(self, fieldname: Optional[str], message: str):
        super().__init__(message)
        self.field = fieldname


@dataclass
class PredictResponse:
    features: dict[str, float]
    regression_estimate: float
    predicted_class: str
    class_distribution: dict[str, float]
    zero_tweet_probability: float
    model_fingerprint: str

    def to_record(self) -> dict:
        return {
            "features": self.features,
            "regression_estimate": self.regression_estimate,
            "predicted_class": self.predicted_class,
            "class_distribution": self.class_distribution,
            "zero_tweet_probability": self.zero_tweet_probability,
            "model_fingerprint": self.model_fingerprint,
        }


def predict_article(bundle: Bundle, request: PredictRequest) -> PredictResponse:
    """The full pipeline for one draft article. Pure given the bundle."""
    request.validate()
    article = Article(
        id="draft",
        url="draft:local",
        source=request.source,
        category=request.category,
        title=request.title,
        summary=request.summary,
        published_at=_PLACEHOLDER_TS,
    )
    fv = bundle.stage.assemble(article)
    if isinstance(bundle.regression, KnnModel):
        estimate = bundle.regression.predict(fv)
    else:
        estimate = predict_regression(bundle.regression, fv)
    distribution = bundle.classifier.predict_proba(fv)
    # argmax with ties to the lexicographically smallest label
    predicted = min(distribution, key=lambda c: (-distribution[c], c))
    zero_p = bundle.zero_model.predict_proba(fv).get("zero", 0.0)
    return PredictResponse(
        features=fv.to_record(),
        regression_estimate=float(estimate),
        predicted_class=predicted,
        class_distribution=distribution,
        zero_tweet_probability=float(zero_p),
        model_fingerprint=bundle.fingerprint,
    )


def _model_metadata(bundle: Bundle) -> dict:
    models = {}
    for name, model in (
        ("regression", bundle.regression),
        ("classifier", bundle.classifier),
        ("zero_tweet", bundle.zero_model),
    ):
        rec = (bundle.model_records or {}).get(name, {})
        models[name] = {
            "algorithm": getattr(model, "form", None) or getattr(model, "algorithm", "knn"),
            "train_fingerprint": model.train_fingerprint,
            "file_fingerprint": bundle.manifest["files"].get(f"{name}.json"),
            "config_fingerprint": rec.get("config_fingerprint"),
            "trained_at": rec.get("trained_at"),
            "seed": rec.get("seed"),
        }
    scheme = bundle.classifier.scheme
    return {
        "bundle_fingerprint": bundle.fingerprint,
        "features_fingerprint": bundle.manifest.get("features_fingerprint"),
        "models": models,
        "class_scheme": scheme.to_record() if scheme else None,
        "classes": bundle.classifier.classes,
    }


def _table_payload(table) -> dict:
    return {
        "kind": table.kind,
        "global_mean": table.global_mean,
        "built_from": table.built_from,
        "scores": {k: table.scores[k] for k in sorted(table.scores)},
    }


class _Handler(BaseHTTPRequestHandler):
    server_version = "newspop/0.1"
    protocol_version = "HTTP/1.1"

    def log_message(self, fmt, *args):  # quiet by default
        if self.server.verbose:
            super().log_message(fmt, *args)

    def _send(self, status: int, payload, content_type="application/json") -> None:
        body = (
            json.dumps(payload, sort_keys=True).encode("utf-8")
            if content_type == "application/json"
            else payload.encode("utf-8")
        )
        self.send_response(status)
        self.send_header("Content-Type", f"{content_type}; charset=utf-8")
        self.send_header("Content-Length", str(len(body)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.end_headers()
        self.wfile.write(body)

    def do_OPTIONS(self):
        # CORS preflight for browser clients of POST /v1/predict
        self.send_response(204)
        self.send_header("Access-Control-Allow-Origin", "*")
        self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
        self.send_header("Access-Control-Allow-Headers", "Content-Type")
        self.send_header("Content-Length", "0")
        self.end_headers()

    def _error(self, status: int, code: str, message: str, fieldname=None) -> None:
        err = {"code": code, "message": message}
        if fieldname:
            err["field"] = fieldname
        self._send(status, {"error": err})

    def do_GET(self):
        bundle: Bundle = self.server.bundle
        if self.path == "/healthz":
            self._send(200, "ok", content_type="text/plain")
        elif self.path == "/v1/model":
            self._send(200, _model_metadata(bundle))
        elif self.path == "/v1/sources":
            self._send(200, _table_payload(bundle.stage.source_table))
        elif self.path == "/v1/categories":
            self._send(200, _table_payload(bundle.stage.category_table))
        else:
            self._error(404, "not_found", f"no route {self.path}")

    def do_POST(self):
        if self.path != "/v1/predict":
            self._error(404, "not_found", f"no route {self.path}")
            return
        try:
            length = int(self.headers.get("Content-Length", "0"))
            raw = self.rfile.read(length)
            rec = json.loads(raw.decode("utf-8"))
        except (ValueError, UnicodeDecodeError):
            self._error(400, "bad_json", "request body is not valid JSON")
            return
        try:
            request = PredictRequest.from_record(rec)
            response = predict_article(self.server.bundle, request)
        except RequestError as exc:
            self._error(400, "invalid_field", str(exc), exc.field)
            return
        except DataError as exc:
            self._error(400, "bad_request", str(exc))
            return
        self._send(200, response.to_record())


class PredictionServer(ThreadingHTTPServer):
    daemon_threads = True

    def __init__(self, bundle: Bundle, address=("127.0.0.1", 0), verbose=False):
        self.bundle = bundle
        self.verbose = verbose
        super().__init__(address, _Handler)


def serve(bundle_dir, host: str = "127.0.0.1", port: int = 8787, verbose=True):
    """Load and verify a bundle, then serve it until interrupted."""
    bundle = load_bundle(bundle_dir)
    server = PredictionServer(bundle, (host, port), verbose=verbose)
    return server
