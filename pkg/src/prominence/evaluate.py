"""Ranking metrics (AUROC, average-precision AUPR) and transfer matrices."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .learn import BaggedModel, Dataset, predict_proba


class UndefinedMetricError(ValueError):
    pass


def _blocks(scores, labels, descending):
    """(positives, negatives) per group of equal scores, in score order."""
    s = np.asarray(scores, dtype=np.float64)
    y = np.asarray(labels, dtype=np.int64)
    if s.shape != y.shape or s.ndim != 1 or len(s) == 0:
        raise ValueError("scores and labels must be equal-length non-empty sequences")
    if not np.all(np.isfinite(s)) or not np.all((y == 0) | (y == 1)):
        raise ValueError("scores must be finite and labels 0/1")
    order = np.argsort(-s if descending else s, kind="mergesort")
    s, y = s[order], y[order]
    cuts = np.flatnonzero(np.diff(s)) + 1
    starts = np.concatenate(([0], cuts))
    ends = np.concatenate((cuts, [len(s)]))
    pos = np.add.reduceat(y, starts)
    return pos, (ends - starts) - pos, s[starts]


def auroc(scores: Sequence[float], labels: Sequence[int]) -> float:
    """Mann-Whitney form: (concordant + tied / 2) / (P * N)."""
    pos, neg, _ = _blocks(scores, labels, descending=False)
    P, N = int(pos.sum()), int(neg.sum())
    if P == 0 or N == 0:
        raise UndefinedMetricError("AUROC needs both classes")
    neg_below = np.concatenate(([0], np.cumsum(neg)[:-1]))
    concordant = float((pos * neg_below).sum())
    tied = float((pos * neg).sum())
    return (concordant + 0.5 * tied) / (P * N)


def aupr(scores: Sequence[float], labels: Sequence[int]) -> float:
    """Average precision. Equal scores form one block and every positive in
    it takes the precision at the end of the block."""
    pos, neg, _ = _blocks(scores, labels, descending=True)
    P = int(pos.sum())
    if P == 0:
        raise UndefinedMetricError("AUPR needs at least one positive")
    tp = np.cumsum(pos)
    seen = np.cumsum(pos + neg)
    return float((pos * (tp / seen)).sum() / P)


def roc_points(scores, labels):
    """ROC vertices (fpr, tpr, threshold) from the highest threshold down."""
    pos, neg, thr = _blocks(scores, labels, descending=True)
    P, N = pos.sum(), neg.sum()
    if P == 0 or N == 0:
        raise UndefinedMetricError("ROC needs both classes")
    tpr = np.concatenate(([0.0], np.cumsum(pos) / P))
    fpr = np.concatenate(([0.0], np.cumsum(neg) / N))
    thr = np.concatenate(([np.inf], thr))
    return list(zip(fpr.tolist(), tpr.tolist(), thr.tolist()))


def safe_metric(fn, scores, labels):
    try:
        return fn(scores, labels)
    except UndefinedMetricError:
        return None


@dataclass
class TransferMatrix:
    names: list[str]
    auroc: dict[str, dict[str, float | None]]
    aupr: dict[str, dict[str, float | None]]
    loss: dict[str, dict[str, dict[str, float | None]]]
    sizes: dict[str, int]

    def to_dict(self) -> dict:
        return {
            "datasets": self.names,
            "auroc": self.auroc,
            "aupr": self.aupr,
            "loss": self.loss,
            "test_sizes": self.sizes,
        }


def check_schema(model: BaggedModel, data: Dataset, where=""):
    expected, given = set(model.feature_names), set(data.feature_names)
    if expected != given:
        missing = sorted(expected - given)
        extra = sorted(given - expected)
        raise ValueError(f"feature schema mismatch{where}: missing {missing}, unexpected {extra}")


def transfer_loss(metric, diag):
    """Relative drop versus the within-dataset metric; None if undefined."""
    if metric is None or not diag:
        return None
    return 1.0 - metric / diag


def transfer_matrix(models: Mapping[str, BaggedModel], cohorts: Mapping[str, Dataset]) -> TransferMatrix:
    """Score every (train, test) pair; loss = 1 - metric / metric(test, test)."""
    names = list(models)
    if set(names) != set(cohorts):
        raise ValueError("models and cohorts must cover the same datasets")
    raw = {"auroc": {}, "aupr": {}}
    for a in names:
        for key in raw:
            raw[key][a] = {}
        for b in names:
            check_schema(models[a], cohorts[b], f" (model {a!r} on data {b!r})")
            p = predict_proba(models[a], cohorts[b])
            raw["auroc"][a][b] = safe_metric(auroc, p, cohorts[b].y)
            raw["aupr"][a][b] = safe_metric(aupr, p, cohorts[b].y)
    loss = {}
    for key, table in raw.items():
        loss[key] = {
            a: {b: 0.0 if a == b else transfer_loss(table[a][b], table[b][b]) for b in names} for a in names
        }
        for a in names:
            if table[a][a] is None:
                loss[key][a][a] = None
    sizes = {b: len(cohorts[b]) for b in names}
    return TransferMatrix(names, raw["auroc"], raw["aupr"], loss, sizes)
