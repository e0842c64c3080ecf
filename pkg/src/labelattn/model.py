"""Label-attentive classifier: forward pass and its recorded trace.

The compositional path is: cosine compatibility between label and word
embeddings -> windowed nonlinear phrase scores -> max over labels ->
softmax attention -> attended average of word embeddings -> linear
classifier (softmax or per-label sigmoid).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .corpus import Example, Vocabulary
from .errors import ShapeError
from .numerics import Param, Prng, relu, sigmoid, softmax

NORM_EPS = 1e-8

VARIANTS = ("leam", "leam_linear", "swem_mean", "swem_max")


@dataclass
class ModelParams:
    """All trainables: word embeddings V, label embeddings C, window
    weights (W1, b1) and classifier weights (W2, b2)."""

    V: Param   # (P, |vocab|)
    C: Param   # (P, K)
    W1: Param  # (2r+1,)
    b1: Param  # (K,)
    W2: Param  # (K, P)
    b2: Param  # (K,)
    r: int
    mode: str  # "single" | "multi"
    vocab: Vocabulary = None
    label_names: list[str] = None

    def __post_init__(self):
        if self.r < 0:
            raise ShapeError("window radius must be >= 0")
        if self.W1.value.shape != (2 * self.r + 1,):
            raise ShapeError(f"W1 must have length {2 * self.r + 1}")
        k, p = self.K, self.P
        if self.C.value.shape != (p, k) or self.W2.value.shape != (k, p) \
                or self.b1.value.shape != (k,) or self.b2.value.shape != (k,):
            raise ShapeError("inconsistent parameter shapes")

    @property
    def K(self) -> int:
        return self.C.value.shape[1]

    @property
    def P(self) -> int:
        return self.V.value.shape[0]

    def trainables(self) -> dict[str, Param]:
        return {"V": self.V, "C": self.C, "W1": self.W1, "b1": self.b1,
                "W2": self.W2, "b2": self.b2}

    def zero_grads(self):
        for p in self.trainables().values():
            p.zero_grad()


def init_params(vocab_size: int, K: int, P: int, r: int, mode: str,
                prng: Prng, V: np.ndarray | None = None,
                C: np.ndarray | None = None, vocab=None,
                label_names=None) -> ModelParams:
    """Fresh parameter set; V/C default to small-uniform and scaled-Gaussian."""
    if V is None:
        V = prng.uniform(-0.01, 0.01, (P, vocab_size))
        V[:, 0] = 0.0  # PAD column
    if C is None:
        C = 0.1 * prng.normal((P, K))
    W1 = prng.uniform(-0.1, 0.1, (2 * r + 1,))
    return ModelParams(
        V=Param(V), C=Param(C), W1=Param(W1), b1=Param(np.zeros(K)),
        W2=Param(0.1 * prng.normal((K, P))), b2=Param(np.zeros(K)),
        r=r, mode=mode, vocab=vocab, label_names=label_names)


@dataclass
class ForwardTrace:
    """Every intermediate of one forward pass, kept for backprop."""

    token_ids: np.ndarray
    Vseq: np.ndarray          # (P, L)
    G: np.ndarray             # (K, L) cosine compatibility
    norm_c: np.ndarray        # (K,)
    norm_v: np.ndarray        # (L,)
    denom: np.ndarray         # (K, L) clipped norm products
    denom_active: np.ndarray  # (K, L) bool: product above the eps floor
    u: np.ndarray             # (K, L) post-ReLU phrase scores
    pool_argmax: np.ndarray   # (L,) winning label per position
    m: np.ndarray             # (L,)
    beta: np.ndarray          # (L,)
    z: np.ndarray             # (P,)
    z_in: np.ndarray          # classifier input (post dropout)
    keep_mask: np.ndarray     # dropout keep mask, or None
    dropout_rate: float
    logits: np.ndarray        # (K,)
    probs: np.ndarray         # (K,)
    variant: str
    mode: str
    max_argmax: np.ndarray = None  # (P,) for swem_max


def compatibility(C: np.ndarray, Vseq: np.ndarray):
    """Cosine compatibility G plus the norm caches needed for backprop."""
    if C.shape[0] != Vseq.shape[0]:
        raise ShapeError(f"embedding dims differ: {C.shape} vs {Vseq.shape}")
    norm_c = np.linalg.norm(C, axis=0)
    norm_v = np.linalg.norm(Vseq, axis=0)
    raw = np.outer(norm_c, norm_v)
    denom = np.maximum(raw, NORM_EPS)
    active = raw > NORM_EPS
    G = (C.T @ Vseq) / denom
    return G, norm_c, norm_v, denom, active


def phrase_compat(G: np.ndarray, W1: np.ndarray, b1: np.ndarray, r: int):
    """ReLU of the (2r+1)-tap windowed score; zero-padded at the ends."""
    if W1.shape != (2 * r + 1,):
        raise ShapeError(f"W1 length {W1.shape} incompatible with r={r}")
    return relu(kernels.window_scores(G, W1, b1))


def label_maxpool(u: np.ndarray):
    """Column max over labels: value and winning index (lowest on ties)."""
    arg = u.argmax(axis=0)
    return u[arg, np.arange(u.shape[1])], arg


def attention(m: np.ndarray, mask: np.ndarray | None = None) -> np.ndarray:
    """Softmax over real-token positions; masked positions get exactly 0."""
    if mask is None:
        return softmax(m)
    mask = np.asarray(mask, dtype=bool)
    if not mask.any():
        raise ValueError("attention over an all-masked sequence")
    beta = np.zeros_like(m, dtype=np.float64)
    beta[mask] = softmax(np.asarray(m, dtype=np.float64)[mask])
    return beta


def attend(Vseq: np.ndarray, beta: np.ndarray) -> np.ndarray:
    """Attention-weighted average of the word embeddings."""
    if Vseq.shape[1] != beta.shape[0]:
        raise ShapeError(f"length mismatch: {Vseq.shape} vs {beta.shape}")
    return Vseq @ beta


def classify(z: np.ndarray, W2: np.ndarray, b2: np.ndarray, mode: str):
    """Logits and probabilities (softmax for single, sigmoid for multi)."""
    logits = W2 @ z + b2
    if mode == "single":
        return logits, softmax(logits)
    return logits, sigmoid(logits)


def _apply_dropout(z, rate, prng, training):
    if training and rate > 0.0:
        if prng is None:
            raise ValueError("dropout requires a prng in training mode")
        keep = prng.random(z.shape[0]) >= rate
        return z * keep / (1.0 - rate), keep
    return z, None


def forward(params: ModelParams, example: Example, variant: str = "leam",
            dropout_rate: float = 0.0, prng: Prng | None = None,
            training: bool = False) -> ForwardTrace:
    """Run the full pipeline for one example, recording every intermediate."""
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}")
    ids = np.asarray(example.token_ids, dtype=np.int64)
    if ids.size == 0:
        raise ValueError("cannot run forward on an empty example")
    Vseq = params.V.value[:, ids]
    L = ids.size
    K = params.K

    max_argmax = None
    if variant.startswith("swem"):
        G = np.zeros((K, L))
        norm_c = np.zeros(K)
        norm_v = np.zeros(L)
        denom = np.full((K, L), NORM_EPS)
        active = np.zeros((K, L), dtype=bool)
        u = np.zeros((K, L))
        arg = np.zeros(L, dtype=np.int64)
        m = np.zeros(L)
        beta = np.full(L, 1.0 / L)
        if variant == "swem_mean":
            z = attend(Vseq, beta)
        else:
            max_argmax = Vseq.argmax(axis=1)
            z = Vseq[np.arange(params.P), max_argmax]
    else:
        G, norm_c, norm_v, denom, active = compatibility(params.C.value, Vseq)
        if variant == "leam":
            u = phrase_compat(G, params.W1.value, params.b1.value, params.r)
        else:  # leam_linear skips the windowed nonlinearity
            u = G
        m, arg = label_maxpool(u)
        beta = attention(m)
        z = attend(Vseq, beta)

    z_in, keep = _apply_dropout(z, dropout_rate, prng, training)
    logits, probs = classify(z_in, params.W2.value, params.b2.value, params.mode)
    return ForwardTrace(
        token_ids=ids, Vseq=Vseq, G=G, norm_c=norm_c, norm_v=norm_v,
        denom=denom, denom_active=active, u=u, pool_argmax=arg, m=m,
        beta=beta, z=z, z_in=z_in, keep_mask=keep, dropout_rate=dropout_rate,
        logits=logits, probs=probs, variant=variant, mode=params.mode,
        max_argmax=max_argmax)


def forward_linear(params, example, **kw) -> ForwardTrace:
    return forward(params, example, variant="leam_linear", **kw)


def forward_swem(params, example, pool: str = "mean", **kw) -> ForwardTrace:
    if pool not in ("mean", "max"):
        raise ValueError(f"unknown pool {pool!r}")
    return forward(params, example, variant=f"swem_{pool}", **kw)


def count_params(params: ModelParams) -> dict:
    """Parameter accounting split into compositional/classifier/embedding."""
    K, P, r = params.K, params.P, params.r
    comp = {"C": K * P, "W1": 2 * r + 1, "b1": K}
    clf = {"W2": K * P, "b2": K}
    emb = {"V": params.V.value.size}
    return {
        "compositional": comp,
        "compositional_total": sum(comp.values()),
        "compositional_leading": K * P,
        "classifier": clf,
        "classifier_total": sum(clf.values()),
        "embedding": emb,
        "embedding_total": sum(emb.values()),
        "total": sum(comp.values()) + sum(clf.values()) + sum(emb.values()),
    }
