"""Self-contained binary checkpoints (parameters + vocabulary + labels).

Layout: magic "LEAM", u32 format version, then little-endian u32 fields
K, P, r, vocab size and mode flag (0=single, 1=multi); the arrays V, C,
W1, b1, W2, b2 as little-endian float64 in that order; the vocabulary as
length-prefixed UTF-8 tokens; then K length-prefixed label names.
"""

from __future__ import annotations

import struct

import numpy as np

from .corpus import Vocabulary
from .errors import DataError
from .model import ModelParams
from .numerics import Param

MAGIC = b"LEAM"
VERSION = 1


def _write_str(buf: list, s: str) -> None:
    raw = s.encode("utf-8")
    buf.append(struct.pack("<I", len(raw)))
    buf.append(raw)


def save(params: ModelParams, path) -> None:
    if params.vocab is None or params.label_names is None:
        raise DataError("checkpoint needs a vocabulary and label names")
    k, p = params.K, params.P
    mode_flag = 0 if params.mode == "single" else 1
    buf = [MAGIC, struct.pack("<6I", VERSION, k, p, params.r,
                              len(params.vocab), mode_flag)]
    for param in (params.V, params.C, params.W1, params.b1,
                  params.W2, params.b2):
        buf.append(np.ascontiguousarray(param.value, dtype="<f8").tobytes())
    for token in params.vocab.tokens:
        _write_str(buf, token)
    for name in params.label_names:
        _write_str(buf, name)
    with open(path, "wb") as fh:
        fh.write(b"".join(buf))


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise DataError("truncated checkpoint")
        out = self.data[self.pos:self.pos + n]
        self.pos += n
        return out

    def u32s(self, n: int):
        return struct.unpack(f"<{n}I", self.take(4 * n))

    def array(self, shape) -> np.ndarray:
        count = int(np.prod(shape))
        arr = np.frombuffer(self.take(8 * count), dtype="<f8")
        return arr.astype(np.float64).reshape(shape)

    def string(self) -> str:
        (n,) = self.u32s(1)
        return self.take(n).decode("utf-8")


def load(path) -> ModelParams:
    with open(path, "rb") as fh:
        data = fh.read()
    r = _Reader(data)
    if r.take(4) != MAGIC:
        raise DataError(f"{path}: not a checkpoint (bad magic)")
    version, k, p, radius, vsize, mode_flag = r.u32s(6)
    if version != VERSION:
        raise DataError(f"{path}: unsupported checkpoint version {version}")
    V = r.array((p, vsize))
    C = r.array((p, k))
    W1 = r.array((2 * radius + 1,))
    b1 = r.array((k,))
    W2 = r.array((k, p))
    b2 = r.array((k,))
    tokens = [r.string() for _ in range(vsize)]
    labels = [r.string() for _ in range(k)]
    if r.pos != len(data):
        raise DataError(f"{path}: trailing bytes in checkpoint")
    return ModelParams(
        V=Param(V), C=Param(C), W1=Param(W1), b1=Param(b1),
        W2=Param(W2), b2=Param(b2), r=radius,
        mode="single" if mode_flag == 0 else "multi",
        vocab=Vocabulary(tokens), label_names=labels)
