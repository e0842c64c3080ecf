"""Turn attention weights into human-readable highlights."""

from __future__ import annotations

import html as html_mod
import json
from dataclasses import dataclass

import numpy as np

from .corpus import encode, tokenize
from .model import ModelParams, forward


@dataclass
class Highlight:
    tokens: list[str]
    weights: list[float]
    predictions: list[dict]  # [{"label":…, "prob":…}]
    top_k: list[dict]        # [{"token":…, "weight":…}]


def explain(params: ModelParams, text: str, l_max: int = 256,
            top_k: int = 5) -> Highlight:
    """Forward the text and pair attention weights with surface tokens."""
    tokens = tokenize(text)[:l_max]
    if not tokens:
        raise ValueError("text is empty after tokenization")
    ex = encode(text, params.vocab, l_max)
    tr = forward(params, ex, variant="leam")
    weights = tr.beta.tolist()
    order = np.argsort(-tr.beta, kind="stable")[:top_k]
    names = params.label_names or [str(i) for i in range(params.K)]
    if params.mode == "single":
        ranked = np.argsort(-tr.probs, kind="stable")
        preds = [{"label": names[i], "prob": float(tr.probs[i])} for i in ranked]
    else:
        preds = [{"label": names[i], "prob": float(p)}
                 for i, p in enumerate(tr.probs)]
    return Highlight(
        tokens=tokens, weights=weights, predictions=preds,
        top_k=[{"token": tokens[i], "weight": float(tr.beta[i])} for i in order])


def buckets(weights, n_buckets: int = 5) -> list[int]:
    """Quantile bucket per weight (0..n_buckets-1), monotone in weight."""
    w = np.asarray(weights, dtype=np.float64)
    qs = np.quantile(w, [(i + 1) / n_buckets for i in range(n_buckets - 1)])
    return [int(np.searchsorted(qs, x, side="left")) for x in w]


_ANSI_SHADES = ["\033[2m", "\033[0m", "\033[33m", "\033[1;33m", "\033[1;31m"]


def render(h: Highlight, fmt: str = "json") -> bytes:
    if fmt == "json":
        return json.dumps({
            "tokens": h.tokens, "weights": h.weights,
            "predictions": h.predictions, "top_k": h.top_k,
        }).encode("utf-8")
    if fmt == "ansi":
        bs = buckets(h.weights)
        parts = [f"{_ANSI_SHADES[b]}{tok}\033[0m"
                 for tok, b in zip(h.tokens, bs)]
        pred = ", ".join(f"{p['label']}={p['prob']:.3f}"
                         for p in h.predictions[:3])
        return (" ".join(parts) + "\n" + pred + "\n").encode("utf-8")
    if fmt == "html":
        spans = []
        wmax = max(h.weights) or 1.0
        for tok, w in zip(h.tokens, h.weights):
            spans.append(
                f'<span style="background: rgba(255,200,0,{w / wmax:.4f})">'
                f"{html_mod.escape(tok)}</span>")
        pred = html_mod.escape(", ".join(
            f"{p['label']}={p['prob']:.3f}" for p in h.predictions[:3]))
        body = " ".join(spans)
        page = ("<!DOCTYPE html><html><head><meta charset=\"utf-8\">"
                "<title>attention</title></head><body>"
                f"<p>{body}</p><p>{pred}</p></body></html>")
        return page.encode("utf-8")
    raise ValueError(f"unknown format {fmt!r}")


def highlight_from_json(data: bytes) -> Highlight:
    obj = json.loads(data.decode("utf-8"))
    return Highlight(tokens=obj["tokens"], weights=obj["weights"],
                     predictions=obj["predictions"], top_k=obj["top_k"])
