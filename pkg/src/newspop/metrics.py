"""Shared metrics. Population variance throughout, so hand examples are exact."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .errors import DataError


def mse(predictions: Sequence[float], actuals: Sequence[float]) -> float:
    p = np.asarray(predictions, dtype=float)
    a = np.asarray(actuals, dtype=float)
    if p.shape != a.shape:
        raise DataError(f"length mismatch: {p.shape} vs {a.shape}")
    return float(np.mean((p - a) ** 2))


def r_squared(predictions: Sequence[float], actuals: Sequence[float]) -> float:
    """Coefficient of determination: 1 - MSE/VAR. May be negative."""
    p = np.asarray(predictions, dtype=float)
    a = np.asarray(actuals, dtype=float)
    if p.shape != a.shape:
        raise DataError(f"length mismatch: {len(p)} vs {len(a)}")
    if len(a) < 2:
        raise DataError("r_squared needs at least 2 points")
    var = float(np.var(a))
    if var == 0.0:
        raise DataError("r_squared undefined: actuals have zero variance")
    return 1.0 - float(np.mean((p - a) ** 2)) / var


def pearson(x: Sequence[float], y: Sequence[float]) -> float:
    """Pearson product-moment correlation coefficient."""
    xv = np.asarray(x, dtype=float)
    yv = np.asarray(y, dtype=float)
    if xv.shape != yv.shape:
        raise DataError(f"length mismatch: {len(xv)} vs {len(yv)}")
    if len(xv) < 3:
        raise DataError("pearson needs at least 3 points")
    xc = xv - xv.mean()
    yc = yv - yv.mean()
    sx = float(np.sqrt(np.mean(xc**2)))
    sy = float(np.sqrt(np.mean(yc**2)))
    if sx == 0.0 or sy == 0.0:
        raise DataError("pearson undefined: zero variance")
    r = float(np.mean(xc * yc)) / (sx * sy)
    return max(-1.0, min(1.0, r))


def accuracy(predictions: Sequence[str], actuals: Sequence[str]) -> float:
    if len(predictions) != len(actuals):
        raise DataError(f"length mismatch: {len(predictions)} vs {len(actuals)}")
    if not actuals:
        raise DataError("accuracy undefined on empty data")
    hits = sum(1 for p, a in zip(predictions, actuals) if p == a)
    return hits / len(actuals)


def confusion_matrix(
    predictions: Sequence[str], actuals: Sequence[str], labels: Sequence[str]
) -> dict[str, dict[str, int]]:
    """Nested counts: confusion[actual][predicted]."""
    table = {a: {p: 0 for p in labels} for a in labels}
    for pred, act in zip(predictions, actuals):
        table[act][pred] += 1
    return table
