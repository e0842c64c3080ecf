"""Text ingestion: tokenizer, vocabulary, datasets and embedding tables."""

from __future__ import annotations

import csv
import json
import re
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError, ShapeError
from .numerics import Prng

PAD, UNK = 0, 1
PAD_TOKEN, UNK_TOKEN = "<pad>", "<unk>"

_TOKEN_RE = re.compile(r"\w+|[^\w\s]")


def tokenize(text: str) -> list[str]:
    """Lowercase and split into word tokens and single punctuation marks."""
    return _TOKEN_RE.findall(text.lower())


@dataclass
class Vocabulary:
    """token<->index mapping with reserved PAD=0 and UNK=1 slots."""

    tokens: list[str]
    index: dict[str, int] = field(init=False)

    def __post_init__(self):
        if self.tokens[:2] != [PAD_TOKEN, UNK_TOKEN]:
            self.tokens = [PAD_TOKEN, UNK_TOKEN] + list(self.tokens)
        self.index = {t: i for i, t in enumerate(self.tokens)}

    def __len__(self):
        return len(self.tokens)

    def get(self, token: str) -> int:
        return self.index.get(token, UNK)


def build_vocab(corpus, min_freq: int = 1, max_size: int = 1_000_000) -> Vocabulary:
    """Frequency-ranked vocabulary; ties broken alphabetically."""
    if min_freq < 1:
        raise ValueError("min_freq must be >= 1")
    counts = Counter()
    for tokens in corpus:
        counts.update(tokens)
    kept = [t for t, c in counts.items() if c >= min_freq]
    kept.sort(key=lambda t: (-counts[t], t))
    return Vocabulary(kept[:max_size])


@dataclass
class EmbeddingTable:
    """Word vectors, one column per vocabulary entry; PAD column is zero."""

    vocab: Vocabulary
    vectors: np.ndarray  # (dim, |vocab|)

    @property
    def dim(self) -> int:
        return self.vectors.shape[0]


def random_embeddings(vocab: Vocabulary, dim: int, prng: Prng) -> EmbeddingTable:
    """Uniform [-0.01, 0.01] init for every non-PAD token."""
    vecs = prng.uniform(-0.01, 0.01, (dim, len(vocab)))
    vecs[:, PAD] = 0.0
    return EmbeddingTable(vocab, vecs)


def load_pretrained(path, vocab: Vocabulary, dim: int, prng: Prng) -> EmbeddingTable:
    """Read a whitespace-delimited embedding text file.

    In-vocabulary tokens get their file vector; everything else is drawn
    uniform in [-0.01, 0.01]; PAD stays zero.
    """
    table = random_embeddings(vocab, dim, prng)
    seen = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            parts = line.rstrip("\n").split(" ")
            if len(parts) != dim + 1:
                raise ShapeError(
                    f"{path}:{lineno}: expected token + {dim} values, "
                    f"got {len(parts)} fields")
            token = parts[0]
            idx = vocab.index.get(token)
            if idx is None or idx == PAD or token in seen:
                continue
            try:
                table.vectors[:, idx] = [float(x) for x in parts[1:]]
            except ValueError as e:
                raise DataError(f"{path}:{lineno}: {e}") from None
            seen.add(token)
    return table


@dataclass
class Example:
    """Encoded document: token indices plus a target.

    target is a class index (single mode) or a length-K 0/1 vector
    (multi mode).
    """

    token_ids: np.ndarray
    target: object = None

    @property
    def length(self) -> int:
        return len(self.token_ids)


def encode(text: str, vocab: Vocabulary, l_max: int, target=None) -> Example:
    """Tokenize, map to indices (UNK for unknowns) and truncate to l_max."""
    if l_max < 1:
        raise ValueError("l_max must be >= 1")
    ids = [vocab.get(t) for t in tokenize(text)][:l_max]
    return Example(np.asarray(ids, dtype=np.int64), target)


@dataclass
class Dataset:
    examples: list[Example]
    num_classes: int
    label_names: list[str]
    mode: str  # "single" | "multi"


def read_dataset(path, fmt: str, mode: str, vocab: Vocabulary,
                 l_max: int = 256, label_names: list[str] | None = None) -> Dataset:
    """Load a CSV (label,text) or JSONL ({text, labels}) dataset.

    K is inferred from the label set unless label_names is given.
    Example order follows file order.
    """
    if fmt == "csv":
        rows = _read_csv_rows(path)
        texts = [t for _, t in rows]
        row_labels = [[lab] for lab, _ in rows]
    elif fmt == "jsonl":
        rows = _read_jsonl_rows(path)
        texts = [t for t, _ in rows]
        row_labels = [labs for _, labs in rows]
    else:
        raise DataError(f"unknown dataset format {fmt!r}")
    if not texts:
        raise DataError(f"{path}: empty dataset")

    if label_names is None:
        label_names = sorted({lab for labs in row_labels for lab in labs})
    label_idx = {lab: i for i, lab in enumerate(label_names)}
    k = len(label_names)

    examples = []
    for rowno, (text, labs) in enumerate(zip(texts, row_labels), start=1):
        for lab in labs:
            if lab not in label_idx:
                raise DataError(f"{path} row {rowno}: unknown label {lab!r}")
        if mode == "single":
            if len(labs) != 1:
                raise DataError(
                    f"{path} row {rowno}: single mode needs exactly one label")
            target = label_idx[labs[0]]
        elif mode == "multi":
            target = np.zeros(k)
            for lab in labs:
                target[label_idx[lab]] = 1.0
        else:
            raise DataError(f"unknown mode {mode!r}")
        examples.append(encode(text, vocab, l_max, target))
    return Dataset(examples, k, list(label_names), mode)


def _read_csv_rows(path):
    with open(path, encoding="utf-8", newline="") as fh:
        out = []
        for rowno, row in enumerate(csv.reader(fh), start=1):
            if not row:
                continue
            if len(row) < 2:
                raise DataError(f"{path} row {rowno}: expected label,text")
            out.append((row[0], row[1]))
    return out


def _read_jsonl_rows(path):
    out = []
    with open(path, encoding="utf-8") as fh:
        for rowno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as e:
                raise DataError(f"{path} row {rowno}: {e}") from None
            if "text" not in obj or "labels" not in obj:
                raise DataError(f"{path} row {rowno}: need 'text' and 'labels'")
            out.append((obj["text"], list(obj["labels"])))
    return out


@dataclass
class LabelDescriptions:
    """Per-class lists of description words; may be empty for a class."""

    words: list[list[str]]

    def __post_init__(self):
        self.words = [list(w) for w in self.words]


def init_label_embeddings(desc: LabelDescriptions, emb: EmbeddingTable,
                          prng: Prng) -> np.ndarray:
    """Label embedding matrix (dim x K).

    Classes with description words resolvable in the vocabulary get the
    mean of those word vectors; the rest get a scaled Gaussian column.
    """
    k = len(desc.words)
    out = np.zeros((emb.dim, k))
    for j, words in enumerate(desc.words):
        ids = [emb.vocab.index[w] for w in words if w in emb.vocab.index
               and emb.vocab.index[w] not in (PAD, UNK)]
        if ids:
            out[:, j] = emb.vectors[:, ids].mean(axis=1)
        else:
            out[:, j] = 0.1 * prng.normal(emb.dim)
    return out


def decode(ids, vocab: Vocabulary) -> list[str]:
    return [vocab.tokens[i] for i in ids]
