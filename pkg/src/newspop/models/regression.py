"""Regression models: log-linear, power-transform, and KNN.

Log-linear:       ln T = b_S ln S + b_C ln C + b_Entmax Ent_max + intercept
Power-transform:  T^p  = (w_S S + w_ct Ent_ct + w_avg Ent_avg + w_max Ent_max)^2

Both are fitted by ordinary least squares in their transformed spaces.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from ..errors import DataError
from ..scoring import FEATURE_NAMES, FeatureVector

LOG_LINEAR = "log_linear"
POWER_TRANSFORM = "power_transform"
REGRESSION_FORMS = (LOG_LINEAR, POWER_TRANSFORM)

RegressionPair = tuple[FeatureVector, float]


def feature_matrix(
    fvs: Sequence[FeatureVector], log_scores: bool = False
) -> np.ndarray:
    """(n, 6) matrix in FEATURE_NAMES order; optionally ln S and ln C."""
    X = np.array([fv.as_tuple() for fv in fvs], dtype=float)
    if log_scores:
        if np.any(X[:, :2] <= 0):
            raise DataError("out of log domain: S and C must be positive")
        X[:, 0] = np.log(X[:, 0])
        X[:, 1] = np.log(X[:, 1])
    return X


def pairs_fingerprint(pairs: Sequence[tuple[FeatureVector, object]]) -> str:
    h = hashlib.sha256()
    for fv, label in pairs:
        h.update(json.dumps([fv.as_tuple(), label], sort_keys=True).encode())
        h.update(b"\n")
    return h.hexdigest()[:16]


@dataclass
class FitStats:
    r_squared: Optional[float]  # in the model's transformed space; None if
    mse: float                  # the labels are constant (R^2 undefined)
    r_squared_raw: Optional[float]
    mse_raw: float
    n: int


@dataclass
class RegressionModel:
    form: str
    coefficients: dict[str, float]
    fit_stats: FitStats
    power_exponent: Optional[float] = None
    train_fingerprint: str = ""


def _check_collinearity(X: np.ndarray, names: Sequence[str]) -> None:
    _, s, vt = np.linalg.svd(X, full_matrices=False)
    if s[0] == 0.0:
        raise DataError(f"collinear features: {', '.join(names)}")
    null_dirs = vt[s / s[0] < 1e-10]
    if len(null_dirs):
        offending = sorted(
            {
                names[i]
                for null in null_dirs
                for i in range(len(names))
                if abs(null[i]) > 1e-8
            }
        )
        raise DataError(f"collinear features: {', '.join(offending)}")


def _ols(X: np.ndarray, y: np.ndarray, names: Sequence[str]) -> np.ndarray:
    _check_collinearity(X, names)
    beta, *_ = np.linalg.lstsq(X, y, rcond=None)
    return beta


def fit_regression(
    train: Sequence[RegressionPair],
    form: str = LOG_LINEAR,
    power_exponent: float = 0.45,
    include_category: bool = True,
) -> RegressionModel:
    """Least-squares fit of one of the two closed regression forms.

    include_category=False drops the ln C term from the log-linear form
    (for single-category runs, where C is constant and the intercept
    absorbs it).
    """
    if form not in REGRESSION_FORMS:
        raise DataError(f"unknown regression form {form!r}")
    if len(train) < 10:
        raise DataError(f"need at least 10 training samples, got {len(train)}")
    labels = np.array([t for _, t in train], dtype=float)
    if np.any(labels < 1):
        raise DataError("regression requires tweets >= 1 (exclude zero-tweet articles)")
    fvs = [fv for fv, _ in train]
    X_all = feature_matrix(fvs)

    if form == LOG_LINEAR:
        score_cols = slice(0, 2) if include_category else slice(0, 1)
        if np.any(X_all[:, score_cols] <= 0):
            raise DataError("out of log domain: S and C must be positive")
        columns = [np.log(X_all[:, 0])]
        names = ["ln S"]
        if include_category:
            columns.append(np.log(X_all[:, 1]))
            names.append("ln C")
        columns += [X_all[:, 4], np.ones(len(train))]
        names += ["Ent_max", "intercept"]
        X = np.column_stack(columns)
        y = np.log(labels)
        beta = _ols(X, y, names)
        fitted = X @ beta
        coeffs = dict(zip(["b_S", "b_C", "b_Entmax", "intercept"], map(float, beta))
                      ) if include_category else dict(
            zip(["b_S", "b_Entmax", "intercept"], map(float, beta))
        )
        raw_pred = np.exp(fitted)
        model = RegressionModel(
            form=form,
            coefficients=coeffs,
            fit_stats=_stats(fitted, y, raw_pred, labels),
            train_fingerprint=pairs_fingerprint(train),
        )
        return model

    if not 0.0 < power_exponent <= 1.0:
        raise DataError(f"power exponent must be in (0, 1], got {power_exponent}")
    X = X_all[:, [0, 3, 5, 4]]  # S, Ent_ct, Ent_avg, Ent_max
    names = ["S", "Ent_ct", "Ent_avg", "Ent_max"]
    y = labels ** (power_exponent / 2.0)
    w = _ols(X, y, names)
    fitted = X @ w
    # (w.x)^2 is sign-blind; the convention is a non-negative linear form
    tol = 1e-9 * max(1.0, float(np.max(np.abs(y))))
    negative = fitted < -tol
    if negative.mean() > 0.01:
        raise DataError(
            "power form linear term is negative on "
            f"{int(negative.sum())} of {len(train)} training samples"
        )
    coeffs = {
        "w_S": float(w[0]),
        "w_ct": float(w[1]),
        "w_avg": float(w[2]),
        "w_max": float(w[3]),
    }
    raw_pred = np.clip(fitted, 0.0, None) ** (2.0 / power_exponent)
    return RegressionModel(
        form=form,
        coefficients=coeffs,
        fit_stats=_stats(fitted, y, raw_pred, labels),
        power_exponent=power_exponent,
        train_fingerprint=pairs_fingerprint(train),
    )


def _stats(fitted, y, raw_pred, labels) -> FitStats:
    from ..metrics import mse, r_squared

    def _safe_r2(p, a):
        return r_squared(p, a) if float(np.var(a)) > 0.0 else None

    return FitStats(
        r_squared=_safe_r2(fitted, y),
        mse=mse(fitted, y),
        r_squared_raw=_safe_r2(raw_pred, labels),
        mse_raw=mse(raw_pred, labels),
        n=len(y),
    )


def predict_regression(model: RegressionModel, fv: FeatureVector) -> float:
    """Closed-form point prediction of the tweet count."""
    if model.form == LOG_LINEAR:
        c = model.coefficients
        uses_category = "b_C" in c
        if fv.S <= 0 or (uses_category and fv.C <= 0):
            raise DataError(f"out of log domain: S={fv.S}, C={fv.C}")
        log_t = c["b_S"] * np.log(fv.S) + c["b_Entmax"] * fv.Ent_max + c["intercept"]
        if uses_category:
            log_t += c["b_C"] * np.log(fv.C)
        return float(np.exp(log_t))
    c = model.coefficients
    linear = (
        c["w_S"] * fv.S
        + c["w_ct"] * fv.Ent_ct
        + c["w_avg"] * fv.Ent_avg
        + c["w_max"] * fv.Ent_max
    )
    return float(max(linear, 0.0) ** (2.0 / model.power_exponent))


def predict_regression_batch(
    model: RegressionModel, fvs: Sequence[FeatureVector]
) -> np.ndarray:
    return np.array([predict_regression(model, fv) for fv in fvs])


@dataclass
class KnnConfig:
    k: int = 7

    def __post_init__(self):
        if self.k < 1:
            raise DataError(f"K must be >= 1, got {self.k}")


@dataclass
class KnnModel:
    """KNN regression state: standardized training features plus labels."""

    k: int
    means: np.ndarray
    sds: np.ndarray
    kept: list[int]
    X: np.ndarray  # standardized
    y: np.ndarray
    train_fingerprint: str = ""

    def standardize(self, fvs: Sequence[FeatureVector]) -> np.ndarray:
        raw = feature_matrix(fvs)[:, self.kept]
        return (raw - self.means) / self.sds

    def predict(self, fv: FeatureVector) -> float:
        q = self.standardize([fv])[0]
        dist = np.sqrt(np.sum((self.X - q) ** 2, axis=1))
        order = np.argsort(dist, kind="stable")  # distance ties keep index order
        return float(np.mean(self.y[order[: self.k]]))


def fit_knn(train: Sequence[RegressionPair], cfg: KnnConfig) -> KnnModel:
    if not train:
        raise DataError("empty training set")
    if cfg.k > len(train):
        raise DataError(f"K={cfg.k} exceeds training size {len(train)}")
    X_raw = feature_matrix([fv for fv, _ in train])
    means = X_raw.mean(axis=0)
    sds = X_raw.std(axis=0)
    kept = [i for i in range(X_raw.shape[1]) if sds[i] > 0.0]
    if not kept:
        raise DataError("all features have zero variance")
    model = KnnModel(
        k=cfg.k,
        means=means[kept],
        sds=sds[kept],
        kept=kept,
        X=(X_raw[:, kept] - means[kept]) / sds[kept],
        y=np.array([t for _, t in train], dtype=float),
        train_fingerprint=pairs_fingerprint(train),
    )
    return model


def knn_predict(
    train: Sequence[RegressionPair], fv: FeatureVector, cfg: KnnConfig
) -> float:
    """Mean label of the K nearest training points (Euclidean, standardized)."""
    return fit_knn(train, cfg).predict(fv)
