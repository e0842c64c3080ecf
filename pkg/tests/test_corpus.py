import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from labelattn.corpus import (PAD, UNK, LabelDescriptions, Vocabulary,
                              build_vocab, decode, encode,
                              init_label_embeddings, load_pretrained,
                              random_embeddings, read_dataset, tokenize)
from labelattn.errors import DataError, ShapeError
from labelattn.numerics import Prng


class TestTokenize:
    def test_punctuation_separated(self):
        assert tokenize("Sports News!") == ["sports", "news", "!"]

    def test_empty(self):
        assert tokenize("") == []

    @given(st.text(max_size=80))
    def test_idempotent_on_joined_output(self, text):
        toks = tokenize(text)
        assert tokenize(" ".join(toks)) == toks


class TestVocab:
    def test_min_freq_filters(self):
        v = build_vocab([["a", "a", "b"]], min_freq=2)
        assert v.tokens == ["<pad>", "<unk>", "a"]

    def test_min_freq_one_keeps_all(self):
        v = build_vocab([["x", "y", "z"]], min_freq=1)
        assert set(v.tokens[2:]) == {"x", "y", "z"}

    def test_frequency_then_alpha_order(self):
        v1 = build_vocab([["b", "c", "b", "a", "c", "d"]])
        v2 = build_vocab([["b", "c", "b", "a", "c", "d"]])
        assert v1.tokens == v2.tokens == ["<pad>", "<unk>", "b", "c", "a", "d"]

    def test_max_size_truncates(self):
        v = build_vocab([["a", "b", "c"]], max_size=2)
        assert len(v) == 4  # PAD + UNK + 2

    def test_bijective(self):
        v = build_vocab([["a", "b"]])
        for t in v.tokens:
            assert v.tokens[v.index[t]] == t


class TestPretrained(object):
    def test_reads_vector(self, tmp_path):
        f = tmp_path / "emb.txt"
        f.write_text("cat 0.1 0.2\n")
        vocab = Vocabulary(["cat", "dog"])
        table = load_pretrained(f, vocab, 2, Prng(0))
        assert np.allclose(table.vectors[:, vocab.get("cat")], [0.1, 0.2])

    def test_oov_in_uniform_range(self, tmp_path):
        f = tmp_path / "emb.txt"
        f.write_text("cat 0.1 0.2\n")
        vocab = Vocabulary(["cat", "dog"])
        table = load_pretrained(f, vocab, 2, Prng(0))
        col = table.vectors[:, vocab.get("dog")]
        assert np.all(np.abs(col) <= 0.01)

    def test_pad_stays_zero(self, tmp_path):
        f = tmp_path / "emb.txt"
        f.write_text("cat 0.1 0.2\n")
        table = load_pretrained(f, Vocabulary(["cat"]), 2, Prng(0))
        assert not table.vectors[:, PAD].any()

    def test_wrong_column_count_names_line(self, tmp_path):
        f = tmp_path / "emb.txt"
        f.write_text("cat 0.1 0.2\ndog 0.3\n")
        with pytest.raises(ShapeError, match=":2"):
            load_pretrained(f, Vocabulary(["cat", "dog"]), 2, Prng(0))

    def test_bad_float_is_data_error(self, tmp_path):
        f = tmp_path / "emb.txt"
        f.write_text("cat zero 0.2\n")
        with pytest.raises(DataError, match=":1"):
            load_pretrained(f, Vocabulary(["cat"]), 2, Prng(0))


class TestEncode:
    def test_known_tokens(self):
        vocab = build_vocab([["red", "green", "blue"]])
        ex = encode("red green blue", vocab, 10)
        assert ex.length == 3
        assert all(i >= 2 for i in ex.token_ids)

    def test_truncation(self):
        vocab = build_vocab([["w"]])
        ex = encode(" ".join(["w"] * 12), vocab, 10)
        assert ex.length == 10

    def test_unknown_maps_to_unk(self):
        vocab = build_vocab([["w"]])
        ex = encode("mystery words here", vocab, 10)
        assert all(i == UNK for i in ex.token_ids)

    def test_round_trip_through_vocab(self):
        vocab = build_vocab([["alpha", "beta", "gamma"]])
        text = "alpha gamma beta"
        ex = encode(text, vocab, 10)
        assert decode(ex.token_ids, vocab) == tokenize(text)

    def test_rejects_bad_l_max(self):
        with pytest.raises(ValueError):
            encode("x", build_vocab([["x"]]), 0)


class TestLabelInit:
    def _table(self):
        vocab = build_vocab([["sports", "business", "finance"]])
        return random_embeddings(vocab, 4, Prng(3))

    def test_single_word_is_that_vector(self):
        table = self._table()
        C = init_label_embeddings(LabelDescriptions([["sports"]]), table, Prng(0))
        idx = table.vocab.get("sports")
        assert np.array_equal(C[:, 0], table.vectors[:, idx])

    def test_two_words_mean(self):
        table = self._table()
        C = init_label_embeddings(
            LabelDescriptions([["business", "finance"]]), table, Prng(0))
        i, j = table.vocab.get("business"), table.vocab.get("finance")
        want = (table.vectors[:, i] + table.vectors[:, j]) / 2.0
        assert np.allclose(C[:, 0], want, atol=1e-15)

    def test_empty_description_reproducible_gaussian(self):
        table = self._table()
        a = init_label_embeddings(LabelDescriptions([[]]), table, Prng(9))
        b = init_label_embeddings(LabelDescriptions([[]]), table, Prng(9))
        assert np.array_equal(a, b)
        assert a.any()

    def test_unresolvable_words_fall_back(self):
        table = self._table()
        C = init_label_embeddings(LabelDescriptions([["zzz"]]), table, Prng(1))
        assert C[:, 0].any()  # Gaussian fallback, not the UNK vector


class TestReadDataset:
    def test_csv_single(self, tmp_path):
        f = tmp_path / "d.csv"
        f.write_text('pos,"great movie"\nneg,"bad movie"\n')
        vocab = build_vocab([["great", "bad", "movie"]])
        ds = read_dataset(f, "csv", "single", vocab)
        assert ds.num_classes == 2 and len(ds.examples) == 2
        assert ds.label_names == ["neg", "pos"]

    def test_jsonl_multi_target_vector(self, tmp_path):
        f = tmp_path / "d.jsonl"
        f.write_text('{"text": "x", "labels": ["a", "c"]}\n')
        vocab = build_vocab([["x"]])
        ds = read_dataset(f, "jsonl", "multi", vocab,
                          label_names=["a", "b", "c"])
        assert np.array_equal(ds.examples[0].target, [1.0, 0.0, 1.0])

    def test_unknown_label_names_row(self, tmp_path):
        f = tmp_path / "d.csv"
        f.write_text("pos,good\nwat,huh\n")
        vocab = build_vocab([["good", "huh"]])
        with pytest.raises(DataError, match="row 2"):
            read_dataset(f, "csv", "single", vocab, label_names=["pos", "neg"])

    def test_empty_file_is_error(self, tmp_path):
        f = tmp_path / "d.csv"
        f.write_text("")
        with pytest.raises(DataError, match="empty"):
            read_dataset(f, "csv", "single", build_vocab([["x"]]))

    def test_order_follows_file(self, tmp_path):
        f = tmp_path / "d.csv"
        f.write_text("a,one\nb,two\na,three\n")
        vocab = build_vocab([["one", "two", "three"]])
        ds = read_dataset(f, "csv", "single", vocab)
        assert [int(e.target) for e in ds.examples] == [0, 1, 0]


def test_label_column_bit_equal_to_word_column(tmp_path):
    # pretrained load + single-word description == exact word column
    f = tmp_path / "emb.txt"
    f.write_text("sports 0.5 -0.25 0.125\n")
    vocab = build_vocab([["sports", "other"]])
    table = load_pretrained(f, vocab, 3, Prng(0))
    C = init_label_embeddings(LabelDescriptions([["sports"]]), table, Prng(0))
    assert np.array_equal(C[:, 0], table.vectors[:, vocab.get("sports")])
