"""Losses, exact backprop through the whole graph, and the Adam loop."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .corpus import Dataset, Example
from .errors import ShapeError
from .model import ForwardTrace, ModelParams, classify, forward
from .numerics import AdamState, Prng, adam_update, sigmoid, softmax

CLAMP = 1e-12


@dataclass
class TrainConfig:
    lr: float = 0.001
    batch_size: int = 100
    epochs: int = 10
    dropout_rate: float = 0.5   # classifier input only
    reg_weight: float = 1.0     # label-regularizer weight
    r: int = 50
    seed: int = 0
    labeled_fraction: float = 1.0
    variant: str = "leam"       # leam | leam_linear | swem_mean | swem_max
    freeze_embeddings: bool = False

    def __post_init__(self):
        if not (0.0 <= self.dropout_rate < 1.0):
            raise ValueError("dropout_rate must be in [0, 1)")
        if not (0.0 < self.labeled_fraction <= 1.0):
            raise ValueError("labeled_fraction must be in (0, 1]")
        if self.lr <= 0:
            raise ValueError("lr must be positive")


@dataclass
class LossReport:
    data_loss: list[float] = field(default_factory=list)
    reg_loss: list[float] = field(default_factory=list)
    total: list[float] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    def to_dict(self):
        return {"data_loss": self.data_loss, "reg_loss": self.reg_loss,
                "total": self.total, "warnings": self.warnings}


def loss_single(probs: np.ndarray, target: int) -> float:
    if not (0 <= int(target) < probs.shape[0]):
        raise ValueError(f"target {target} out of range for K={probs.shape[0]}")
    return -math.log(max(probs[int(target)], CLAMP))


def loss_multi(probs: np.ndarray, target: np.ndarray) -> float:
    target = np.asarray(target, dtype=np.float64)
    if probs.shape != target.shape:
        raise ShapeError(f"shape mismatch {probs.shape} vs {target.shape}")
    p = np.clip(probs, CLAMP, 1.0 - CLAMP)
    ce = -(target * np.log(p) + (1.0 - target) * np.log(1.0 - p))
    return float(ce.mean())


def data_loss(trace: ForwardTrace, target) -> float:
    if trace.mode == "single":
        return loss_single(trace.probs, target)
    return loss_multi(trace.probs, target)


def label_reg_loss(params: ModelParams) -> float:
    """Mean cost of classifying each label embedding as its own class."""
    k = params.K
    total = 0.0
    for j in range(k):
        logits, probs = classify(params.C.value[:, j], params.W2.value,
                                 params.b2.value, params.mode)
        if params.mode == "single":
            total += loss_single(probs, j)
        else:
            y = np.zeros(k)
            y[j] = 1.0
            total += loss_multi(probs, y)
    return total / k


def label_reg_backward(params: ModelParams, weight: float) -> None:
    """Accumulate gradients of weight * label_reg_loss into params."""
    k = params.K
    for j in range(k):
        c = params.C.value[:, j]
        logits = params.W2.value @ c + params.b2.value
        if params.mode == "single":
            probs = softmax(logits)
            dlogits = probs.copy()
            dlogits[j] -= 1.0
            dlogits *= weight / k
        else:
            probs = sigmoid(logits)
            y = np.zeros(k)
            y[j] = 1.0
            dlogits = (probs - y) * (weight / (k * k))
        params.W2.grad += np.outer(dlogits, c)
        params.b2.grad += dlogits
        params.C.grad[:, j] += params.W2.value.T @ dlogits


def _dlogits(trace: ForwardTrace, target) -> np.ndarray:
    if trace.mode == "single":
        d = trace.probs.copy()
        d[int(target)] -= 1.0
        return d
    y = np.asarray(target, dtype=np.float64)
    return (trace.probs - y) / y.shape[0]


def backward(trace: ForwardTrace, target, params: ModelParams,
             config: TrainConfig | None = None, scale: float = 1.0) -> None:
    """Accumulate exact gradients of scale * data_loss into params."""
    freeze_v = bool(config and config.freeze_embeddings)
    ids = trace.token_ids
    Vseq = trace.Vseq
    L = ids.size

    dlogits = _dlogits(trace, target) * scale
    params.W2.grad += np.outer(dlogits, trace.z_in)
    params.b2.grad += dlogits
    dz = params.W2.value.T @ dlogits
    if trace.keep_mask is not None:
        dz = dz * trace.keep_mask / (1.0 - trace.dropout_rate)

    dVseq = np.zeros_like(Vseq)

    if trace.variant == "swem_mean":
        dVseq += dz[:, None] / L
    elif trace.variant == "swem_max":
        dVseq[np.arange(dz.shape[0]), trace.max_argmax] += dz
    else:
        # through z = Vseq @ beta
        dbeta = Vseq.T @ dz
        dVseq += np.outer(dz, trace.beta)
        # softmax over real tokens (no padding present in the trace)
        beta = trace.beta
        dm = beta * (dbeta - float(beta @ dbeta))
        # max over labels: route to the winning row
        dU = np.zeros_like(trace.u)
        dU[trace.pool_argmax, np.arange(L)] = dm
        if trace.variant == "leam":
            dA = dU * (trace.u > 0)
            dG, dw1, db1 = kernels.window_scores_backward(
                trace.G, params.W1.value, dA)
            params.W1.grad += dw1
            params.b1.grad += db1
        else:  # linear variant: m comes straight from G
            dG = dU
        # cosine compatibility: G = (C^T Vseq) / max(|c||v|, eps)
        dS = dG / trace.denom
        dN = np.where(trace.denom_active,
                      -dG * trace.G / trace.denom, 0.0)
        params.C.grad += Vseq @ dS.T
        dVseq += params.C.value @ dS
        dnorm_c = dN @ trace.norm_v
        dnorm_v = dN.T @ trace.norm_c
        safe_c = np.where(trace.norm_c > 0, trace.norm_c, 1.0)
        safe_v = np.where(trace.norm_v > 0, trace.norm_v, 1.0)
        params.C.grad += params.C.value * (dnorm_c / safe_c)
        dVseq += Vseq * (dnorm_v / safe_v)

    if not freeze_v:
        np.add.at(params.V.grad.T, ids, dVseq.T)


def apply_dropout(z: np.ndarray, rate: float, prng: Prng | None,
                  training: bool):
    """Inverted dropout on the classifier input; identity at inference."""
    if not (0.0 <= rate < 1.0):
        raise ValueError("rate must be in [0, 1)")
    if not training or rate == 0.0:
        return z
    keep = prng.random(z.shape[0]) >= rate
    return z * keep / (1.0 - rate)


def total_loss(params: ModelParams, examples: list[Example],
               config: TrainConfig) -> float:
    """Mean data loss over examples plus the weighted label regularizer.

    Dropout is never applied here; this is the gradient-check target.
    """
    d = 0.0
    for ex in examples:
        tr = forward(params, ex, variant=config.variant)
        d += data_loss(tr, ex.target)
    d /= len(examples)
    return d + config.reg_weight * label_reg_loss(params)


def accumulate_total_grads(params: ModelParams, examples: list[Example],
                           config: TrainConfig) -> None:
    """Analytic gradients of total_loss, accumulated into params."""
    scale = 1.0 / len(examples)
    for ex in examples:
        tr = forward(params, ex, variant=config.variant)
        backward(tr, ex.target, params, config, scale=scale)
    if config.reg_weight != 0.0:
        label_reg_backward(params, config.reg_weight)


def subsample(dataset: Dataset, fraction: float, seed: int) -> Dataset:
    """Seeded subsample, stratified by class in single mode.

    Per-class counts follow largest-remainder allocation so the total is
    exactly ceil(N * fraction).
    """
    if not (0.0 < fraction <= 1.0):
        raise ValueError("fraction must be in (0, 1]")
    if fraction == 1.0:
        return dataset
    n = len(dataset.examples)
    want = math.ceil(n * fraction)
    prng = Prng(seed)
    warnings = []
    if dataset.mode == "single":
        by_class = {k: [] for k in range(dataset.num_classes)}
        for i, ex in enumerate(dataset.examples):
            by_class[int(ex.target)].append(i)
        quotas = {k: len(ix) * fraction for k, ix in by_class.items()}
        counts = {k: min(int(q), len(by_class[k])) for k, q in quotas.items()}
        rest = want - sum(counts.values())
        order = sorted(by_class, key=lambda k: (-(quotas[k] - int(quotas[k])), k))
        for k in order:
            if rest <= 0:
                break
            if counts[k] < len(by_class[k]):
                counts[k] += 1
                rest -= 1
        chosen = []
        for k, ix in by_class.items():
            if counts[k] == 0 and ix:
                warnings.append(f"class {k} received zero examples")
            perm = prng.permutation(len(ix))
            chosen.extend(ix[j] for j in perm[:counts[k]])
        chosen.sort()
    else:
        perm = prng.permutation(n)
        chosen = sorted(perm[:want].tolist())
    sub = Dataset([dataset.examples[i] for i in chosen],
                  dataset.num_classes, dataset.label_names, dataset.mode)
    sub.subsample_warnings = warnings
    return sub


def fit(dataset: Dataset, params: ModelParams, config: TrainConfig) -> LossReport:
    """Minibatch Adam training; deterministic given the seed."""
    if not dataset.examples:
        raise ValueError("cannot train on an empty dataset")
    if dataset.mode != params.mode:
        raise ValueError(f"dataset mode {dataset.mode!r} != model mode "
                         f"{params.mode!r}")
    if config.labeled_fraction < 1.0:
        dataset = subsample(dataset, config.labeled_fraction, config.seed)

    shuffle_rng = Prng(config.seed)
    dropout_rng = shuffle_rng.spawn()
    states = {name: AdamState.for_param(p, lr=config.lr)
              for name, p in params.trainables().items()}
    report = LossReport()
    report.warnings.extend(getattr(dataset, "subsample_warnings", []))

    n = len(dataset.examples)
    bs = min(config.batch_size, n)
    for _ in range(config.epochs):
        order = shuffle_rng.permutation(n)
        epoch_data, epoch_reg, batches = 0.0, 0.0, 0
        for start in range(0, n, bs):
            idx = order[start:start + bs]
            batch = [dataset.examples[i] for i in idx]
            params.zero_grads()
            bd = 0.0
            for ex in batch:
                tr = forward(params, ex, variant=config.variant,
                             dropout_rate=config.dropout_rate,
                             prng=dropout_rng, training=True)
                bd += data_loss(tr, ex.target)
                backward(tr, ex.target, params, config, scale=1.0 / len(batch))
            bd /= len(batch)
            br = label_reg_loss(params)
            if config.reg_weight != 0.0:
                label_reg_backward(params, config.reg_weight)
            for name, p in params.trainables().items():
                adam_update(p, states[name])
            epoch_data += bd
            epoch_reg += br
            batches += 1
        ed, er = epoch_data / batches, epoch_reg / batches
        report.data_loss.append(ed)
        report.reg_loss.append(er)
        report.total.append(ed + config.reg_weight * er)
    return report
