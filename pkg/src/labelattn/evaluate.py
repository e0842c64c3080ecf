"""Classification metrics and the label/document-center cosine diagnostic."""

from __future__ import annotations

import json

import numpy as np

from .corpus import Dataset
from .model import ModelParams, forward

UNDEFINED = "undefined"


def accuracy(preds, targets) -> float:
    preds = np.asarray(preds)
    targets = np.asarray(targets)
    if preds.size == 0:
        raise ValueError("accuracy of empty prediction list")
    if preds.shape != targets.shape:
        raise ValueError(f"length mismatch: {preds.shape} vs {targets.shape}")
    return float(np.mean(preds == targets))


def f1(scores: np.ndarray, targets: np.ndarray, threshold: float = 0.5,
       averaging: str = "micro") -> float:
    """F1 after binarizing at threshold. Zero-division convention: 0."""
    pred = np.asarray(scores) >= threshold
    true = np.asarray(targets) > 0.5
    if averaging == "micro":
        tp = np.sum(pred & true)
        fp = np.sum(pred & ~true)
        fn = np.sum(~pred & true)
        return _f1_from_counts(tp, fp, fn)
    if averaging == "macro":
        vals = []
        for k in range(pred.shape[1]):
            tp = np.sum(pred[:, k] & true[:, k])
            fp = np.sum(pred[:, k] & ~true[:, k])
            fn = np.sum(~pred[:, k] & true[:, k])
            vals.append(_f1_from_counts(tp, fp, fn))
        return float(np.mean(vals))
    raise ValueError(f"unknown averaging {averaging!r}")


def _f1_from_counts(tp, fp, fn) -> float:
    denom = 2 * tp + fp + fn
    return float(2 * tp / denom) if denom > 0 else 0.0


def _rank_auc(scores: np.ndarray, labels: np.ndarray):
    """Mann-Whitney AUC with midrank ties; None when degenerate."""
    pos = labels > 0.5
    n_pos = int(pos.sum())
    n_neg = labels.size - n_pos
    if n_pos == 0 or n_neg == 0:
        return None
    order = np.argsort(scores, kind="stable")
    ranks = np.empty(scores.size)
    sorted_scores = scores[order]
    i = 0
    while i < scores.size:
        j = i
        while j + 1 < scores.size and sorted_scores[j + 1] == sorted_scores[i]:
            j += 1
        ranks[order[i:j + 1]] = 0.5 * (i + j) + 1.0  # midrank, 1-based
        i = j + 1
    rank_sum = ranks[pos].sum()
    return float((rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


def auc(scores: np.ndarray, targets: np.ndarray, averaging: str = "micro"):
    """ROC AUC; micro pools all (example, label) pairs, macro averages
    per-label AUCs skipping degenerate labels. Returns None if undefined."""
    scores = np.asarray(scores, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.float64)
    if averaging == "micro":
        return _rank_auc(scores.ravel(), targets.ravel())
    if averaging == "macro":
        vals = [_rank_auc(scores[:, k], targets[:, k])
                for k in range(scores.shape[1])]
        vals = [v for v in vals if v is not None]
        return float(np.mean(vals)) if vals else None
    raise ValueError(f"unknown averaging {averaging!r}")


def precision_at_n(scores: np.ndarray, target: np.ndarray, n: int) -> float:
    """Fraction of the n top-scored labels present in the ground truth.

    Ties broken toward the lower label index.
    """
    scores = np.asarray(scores, dtype=np.float64)
    k = scores.shape[0]
    if not (1 <= n <= k):
        raise ValueError(f"n must be in [1, {k}]")
    # stable sort on -score keeps lower indices first among ties
    top = np.argsort(-scores, kind="stable")[:n]
    return float(np.asarray(target)[top].sum() / n)


def metrics_single(params: ModelParams, dataset: Dataset) -> dict:
    preds, targets = [], []
    for ex in dataset.examples:
        tr = forward(params, ex, variant="leam")
        preds.append(int(np.argmax(tr.probs)))
        targets.append(int(ex.target))
    return {"accuracy": accuracy(preds, targets)}


def metrics_multi(params: ModelParams, dataset: Dataset,
                  p_at: tuple[int, ...] = (1, 5)) -> dict:
    scores = np.stack([forward(params, ex, variant="leam").probs
                       for ex in dataset.examples])
    targets = np.stack([np.asarray(ex.target, dtype=np.float64)
                        for ex in dataset.examples])
    out = {
        "micro_f1": f1(scores, targets, averaging="micro"),
        "macro_f1": f1(scores, targets, averaging="macro"),
        "micro_auc": auc(scores, targets, averaging="micro"),
        "macro_auc": auc(scores, targets, averaging="macro"),
    }
    for n in p_at:
        n_eff = min(n, dataset.num_classes)
        out[f"p_at_{n}"] = float(np.mean(
            [precision_at_n(s, t, n_eff) for s, t in zip(scores, targets)]))
    return out


def evaluate(params: ModelParams, dataset: Dataset,
             p_at: tuple[int, ...] = (1, 5)) -> dict:
    """MetricsReport as a flat dict; undefined metrics marked as such."""
    if dataset.mode == "single":
        report = metrics_single(params, dataset)
    else:
        report = metrics_multi(params, dataset, p_at)
    return {k: (UNDEFINED if v is None else v) for k, v in report.items()}


def metrics_to_json(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True)


def class_center_similarity(params: ModelParams, dataset: Dataset) -> np.ndarray:
    """K x K cosine matrix: rows are per-class mean document embeddings,
    columns are label embeddings. Empty classes give NaN rows."""
    if dataset.mode != "single":
        raise ValueError("class centers require a single-label dataset")
    k, p = params.K, params.P
    sums = np.zeros((k, p))
    counts = np.zeros(k)
    for ex in dataset.examples:
        tr = forward(params, ex, variant="leam")
        sums[int(ex.target)] += tr.z
        counts[int(ex.target)] += 1
    out = np.full((k, k), np.nan)
    C = params.C.value
    for i in range(k):
        if counts[i] == 0:
            continue
        zbar = sums[i] / counts[i]
        nz = np.linalg.norm(zbar)
        for j in range(k):
            nc = np.linalg.norm(C[:, j])
            denom = nz * nc
            out[i, j] = float(zbar @ C[:, j] / denom) if denom > 0 else np.nan
    return out
