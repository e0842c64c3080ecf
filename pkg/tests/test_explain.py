import json
from html.parser import HTMLParser

import numpy as np
import pytest

from corpora import keyword_corpus

from labelattn.corpus import encode
from labelattn.explain import (Highlight, buckets, explain,
                               highlight_from_json, render)
from labelattn.model import forward, init_params
from labelattn.numerics import Prng


def trained_free_params():
    train, test, vocab, V, C = keyword_corpus(n_train=10, n_test=2)
    params = init_params(len(vocab), 4, 50, 1, "single", Prng(0),
                         V=V.copy(), C=C.copy(), vocab=vocab,
                         label_names=train.label_names)
    return params, vocab


class TestExplain:
    def test_single_token_weight_one(self):
        params, vocab = trained_free_params()
        h = explain(params, "n0")
        assert h.weights == [1.0]

    def test_weights_equal_trace_beta(self):
        params, vocab = trained_free_params()
        text = "n0 s1_0 n2 s1_1"
        h = explain(params, text)
        tr = forward(params, encode(text, vocab, 256))
        assert np.array_equal(np.array(h.weights), tr.beta)

    def test_empty_text_raises(self):
        params, _ = trained_free_params()
        with pytest.raises(ValueError):
            explain(params, "   ")

    def test_top_k_sorted_desc(self):
        params, _ = trained_free_params()
        h = explain(params, "n0 n1 n2 s0_0 s1_1 n3")
        ws = [t["weight"] for t in h.top_k]
        assert ws == sorted(ws, reverse=True)


class TestRender:
    def _highlight(self, weights=None):
        weights = weights or [0.1, 0.2, 0.3, 0.4]
        return Highlight(
            tokens=["a", "b", "<c>", "d"][:len(weights)],
            weights=weights,
            predictions=[{"label": "x", "prob": 0.9}],
            top_k=[{"token": "d", "weight": weights[-1]}])

    def test_json_round_trip(self):
        h = self._highlight()
        again = highlight_from_json(render(h, "json"))
        assert again == h

    def test_ansi_uniform_weights_one_bucket(self):
        h = self._highlight([0.25, 0.25, 0.25, 0.25])
        bs = buckets(h.weights)
        assert len(set(bs)) == 1

    def test_bucketing_is_monotone(self):
        rng = np.random.default_rng(0)
        for _ in range(10):
            w = rng.random(12)
            w = (w / w.sum()).tolist()
            bs = buckets(w)
            order = np.argsort(w)
            sorted_buckets = [bs[i] for i in order]
            assert sorted_buckets == sorted(sorted_buckets)

    def test_html_escapes_and_parses(self):
        h = Highlight(
            tokens=["<script>", "&", '"quote"'],
            weights=[0.2, 0.3, 0.5],
            predictions=[{"label": "<b>", "prob": 1.0}],
            top_k=[])
        page = render(h, "html").decode("utf-8")
        assert "<script>" not in page

        seen = []

        class Collector(HTMLParser):
            def handle_starttag(self, tag, attrs):
                seen.append(tag)

        Collector().feed(page)
        assert "script" not in seen
        assert "span" in seen

    def test_unknown_format(self):
        with pytest.raises(ValueError):
            render(self._highlight(), "pdf")
