"""Command-line driver: train, eval, predict, explain, bench."""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

import numpy as np

from . import checkpoint, kernels
from .corpus import (LabelDescriptions, _read_csv_rows, _read_jsonl_rows,
                     build_vocab, encode, init_label_embeddings,
                     load_pretrained, random_embeddings, read_dataset,
                     tokenize)
from .errors import ConfigError, DataError, LabelAttnError
from .evaluate import evaluate, metrics_to_json
from .explain import explain, render
from .model import ModelParams, count_params, forward, init_params
from .numerics import Prng
from .train import TrainConfig, backward, fit

BOOL_KEYS = {"freeze_embeddings"}
INT_KEYS = {"epochs", "batch_size", "r", "seed", "dim", "min_freq",
            "max_len", "iters", "k", "p", "l"}
FLOAT_KEYS = {"lr", "dropout_rate", "reg_weight", "labeled_fraction"}


def _load_config_file(path) -> dict:
    """Flat key=value file; '#' starts a comment."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key=value")
            key, value = (s.strip() for s in line.split("=", 1))
            key = key.replace("-", "_")
            if key in BOOL_KEYS:
                out[key] = value.lower() in ("1", "true", "yes")
            elif key in INT_KEYS:
                out[key] = int(value)
            elif key in FLOAT_KEYS:
                out[key] = float(value)
            else:
                out[key] = value
    return out


def _read_texts(path, fmt):
    if fmt == "csv":
        return [t for _, t in _read_csv_rows(path)]
    return [t for t, _ in _read_jsonl_rows(path)]


def _load_label_descriptions(path, label_names):
    """Lines of the form 'label: word word ...'."""
    by_label = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if ":" not in line:
                raise ConfigError(f"{path}:{lineno}: expected 'label: words'")
            label, words = line.split(":", 1)
            by_label[label.strip()] = tokenize(words)
    unknown = set(by_label) - set(label_names)
    if unknown:
        raise ConfigError(f"{path}: descriptions for unknown labels {sorted(unknown)}")
    return LabelDescriptions([by_label.get(name, []) for name in label_names])


def cmd_train(args) -> int:
    for path in filter(None, [args.train, args.val, args.embeddings,
                              args.label_desc]):
        if not os.path.exists(path):
            raise ConfigError(f"path does not exist: {path}")
    fmt = args.format
    mode = args.mode
    prng = Prng(args.seed)

    texts = _read_texts(args.train, fmt)
    vocab = build_vocab((tokenize(t) for t in texts),
                        min_freq=args.min_freq, max_size=args.max_vocab)
    label_names = args.labels.split(",") if args.labels else None
    dataset = read_dataset(args.train, fmt, mode, vocab, l_max=args.max_len,
                           label_names=label_names)
    label_names = dataset.label_names

    if args.embeddings:
        table = load_pretrained(args.embeddings, vocab, args.dim, prng)
    else:
        table = random_embeddings(vocab, args.dim, prng)
    if args.label_desc:
        desc = _load_label_descriptions(args.label_desc, label_names)
    else:
        desc = LabelDescriptions([tokenize(name) for name in label_names]
                                 if args.embeddings
                                 else [[] for _ in label_names])
    C0 = init_label_embeddings(desc, table, prng)

    params = init_params(len(vocab), dataset.num_classes, args.dim, args.r,
                         mode, prng, V=table.vectors, C=C0, vocab=vocab,
                         label_names=label_names)
    config = TrainConfig(
        lr=args.lr, batch_size=args.batch_size, epochs=args.epochs,
        dropout_rate=args.dropout_rate, reg_weight=args.reg_weight,
        r=args.r, seed=args.seed, labeled_fraction=args.labeled_fraction,
        variant=args.variant, freeze_embeddings=args.freeze_embeddings)
    report = fit(dataset, params, config)

    os.makedirs(args.output, exist_ok=True)
    ckpt_path = os.path.join(args.output, "model.ckpt")
    checkpoint.save(params, ckpt_path)
    with open(os.path.join(args.output, "loss.json"), "w") as fh:
        json.dump(report.to_dict(), fh, indent=2)

    print(f"checkpoint: {ckpt_path}")
    print(f"final loss: {report.total[-1]:.6f}")
    print("train metrics:", metrics_to_json(evaluate(params, dataset)))
    if args.val:
        val = read_dataset(args.val, fmt, mode, vocab, l_max=args.max_len,
                           label_names=label_names)
        print("val metrics:", metrics_to_json(evaluate(params, val)))
    return 0


def cmd_eval(args) -> int:
    params = checkpoint.load(args.checkpoint)
    if args.mode and args.mode != params.mode:
        raise DataError(f"checkpoint mode {params.mode!r} != requested "
                        f"{args.mode!r}")
    dataset = read_dataset(args.data, args.format, params.mode, params.vocab,
                           l_max=args.max_len, label_names=params.label_names)
    p_at = tuple(int(n) for n in args.p_at.split(",")) if args.p_at else (1, 5)
    report = evaluate(params, dataset, p_at=p_at)
    text = metrics_to_json(report)
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text + "\n")
    print(text)
    return 0


def cmd_predict(args) -> int:
    params = checkpoint.load(args.checkpoint)
    names = params.label_names
    out = open(args.output, "w") if args.output else sys.stdout
    skipped = done = failed = 0
    try:
        with open(args.input, encoding="utf-8") as fh:
            for line in fh:
                text = line.rstrip("\n")
                if args.format == "jsonl":
                    try:
                        text = json.loads(text)["text"]
                    except (json.JSONDecodeError, KeyError):
                        failed += 1
                        out.write(json.dumps({"error": "unparseable record"}) + "\n")
                        continue
                ex = encode(text, params.vocab, args.max_len)
                if ex.length == 0:
                    skipped += 1
                    out.write(json.dumps({"skipped": True}) + "\n")
                    continue
                tr = forward(params, ex, variant="leam")
                if params.mode == "single":
                    top = int(np.argmax(tr.probs))
                    rec = {"label": names[top], "prob": float(tr.probs[top])}
                else:
                    rec = {"labels": [names[i] for i, p in enumerate(tr.probs)
                                      if p >= 0.5],
                           "scores": [float(p) for p in tr.probs]}
                out.write(json.dumps(rec) + "\n")
                done += 1
    finally:
        if args.output:
            out.close()
    print(f"predicted={done} skipped={skipped} failed={failed}",
          file=sys.stderr)
    return 0


def cmd_explain(args) -> int:
    params = checkpoint.load(args.checkpoint)
    h = explain(params, args.text, l_max=args.max_len)
    blob = render(h, args.format)
    if args.output:
        with open(args.output, "wb") as fh:
            fh.write(blob)
    else:
        sys.stdout.buffer.write(blob)
        sys.stdout.buffer.flush()
    return 0


def _bench_once(k, p, r, length, iters, seed, with_backward):
    from .corpus import Example
    prng = Prng(seed)
    params = init_params(max(length + 2, 32), k, p, r, "single", prng)
    ids = np.arange(2, length + 2) % (length + 1) + 1
    ex = Example(np.asarray(ids[:length], dtype=np.int64), 0)
    cfg = TrainConfig(r=r, dropout_rate=0.0, epochs=1)
    start = time.perf_counter()
    for _ in range(iters):
        tr = forward(params, ex, variant="leam")
        if with_backward:
            backward(tr, 0, params, cfg)
    return time.perf_counter() - start


def _with_backend(name, fn):
    """Run fn with the kernel backend temporarily switched to name."""
    impl = kernels.BACKENDS[name]
    saved = (kernels.window_scores, kernels.window_scores_backward)
    kernels.window_scores = impl.window_scores
    kernels.window_scores_backward = impl.window_scores_backward
    try:
        return fn()
    finally:
        kernels.window_scores, kernels.window_scores_backward = saved


def cmd_bench(args) -> int:
    prng = Prng(args.seed)
    params = init_params(32, args.k, args.p, args.r, "single", prng)
    print("parameter accounting:")
    print(json.dumps(count_params(params), indent=2))
    print(f"kernel backend: {kernels.BACKEND} "
          f"(available: {sorted(kernels.BACKENDS)})")

    lengths = [args.l, 2 * args.l]
    for name in sorted(kernels.BACKENDS):
        rows = []
        for length in lengths:
            dt = _with_backend(name, lambda: _bench_once(
                args.k, args.p, args.r, length, args.iters, args.seed,
                args.backward))
            rows.append((length, dt))
            per_1k = dt / args.iters * 1000.0
            print(f"[{name}] L={length:6d}  {args.iters} iters in {dt:.3f}s  "
                  f"({per_1k:.3f}s per 1000)")
        print(f"[{name}] time ratio 2L/L: {rows[1][1] / rows[0][1]:.2f}")

    for r in (int(x) for x in args.r_sweep.split(",")):
        dt = _bench_once(args.k, args.p, r, args.l, args.iters, args.seed,
                         args.backward)
        print(f"r={r:4d}  L={args.l}  {args.iters} iters in {dt:.3f}s")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="labelattn",
        description="label-attentive text classifier")
    parser.add_argument("--config", help="flat key=value config file")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--max-len", type=int, default=256)

    t = sub.add_parser("train", help="train a model")
    t.add_argument("--train", required=True, help="training data path")
    t.add_argument("--val", help="validation data path")
    t.add_argument("--format", choices=["csv", "jsonl"], default="csv")
    t.add_argument("--mode", choices=["single", "multi"], default="single")
    t.add_argument("--output", required=True, help="output directory")
    t.add_argument("--embeddings", help="pretrained embedding text file")
    t.add_argument("--label-desc", help="label description file")
    t.add_argument("--labels", help="comma-separated label names")
    t.add_argument("--dim", type=int, default=300)
    t.add_argument("--min-freq", type=int, default=1)
    t.add_argument("--max-vocab", type=int, default=1_000_000)
    t.add_argument("--lr", type=float, default=0.001)
    t.add_argument("--batch-size", type=int, default=100)
    t.add_argument("--epochs", type=int, default=10)
    t.add_argument("--dropout-rate", type=float, default=0.5)
    t.add_argument("--reg-weight", type=float, default=1.0)
    t.add_argument("--r", type=int, default=50)
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--labeled-fraction", type=float, default=1.0)
    t.add_argument("--variant", default="leam",
                   choices=["leam", "leam_linear", "swem_mean", "swem_max"])
    t.add_argument("--freeze-embeddings", action="store_true")
    common(t)
    t.set_defaults(func=cmd_train)

    e = sub.add_parser("eval", help="evaluate a checkpoint")
    e.add_argument("--checkpoint", required=True)
    e.add_argument("--data", required=True)
    e.add_argument("--format", choices=["csv", "jsonl"], default="csv")
    e.add_argument("--mode", choices=["single", "multi"])
    e.add_argument("--p-at", help="comma-separated n values for P@n")
    e.add_argument("--output", help="metrics JSON output path")
    common(e)
    e.set_defaults(func=cmd_eval)

    p = sub.add_parser("predict", help="predict labels for input records")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--format", choices=["txt", "jsonl"], default="txt")
    p.add_argument("--output", help="predictions JSONL path (default stdout)")
    common(p)
    p.set_defaults(func=cmd_predict)

    x = sub.add_parser("explain", help="render attention highlights")
    x.add_argument("--checkpoint", required=True)
    x.add_argument("--text", required=True)
    x.add_argument("--format", choices=["json", "ansi", "html"],
                   default="json")
    x.add_argument("--output")
    common(x)
    x.set_defaults(func=cmd_explain)

    b = sub.add_parser("bench", help="parameter counts and kernel timings")
    b.add_argument("--k", type=int, default=10)
    b.add_argument("--p", type=int, default=300)
    b.add_argument("--r", type=int, default=50)
    b.add_argument("--l", type=int, default=500)
    b.add_argument("--iters", type=int, default=200)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--backward", action="store_true",
                   help="time forward+backward instead of forward only")
    b.add_argument("--r-sweep", default="1,5,15,50")
    b.set_defaults(func=cmd_bench)
    parser._command_parsers = [t, e, p, x, b]
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    # apply config-file values as defaults before parsing flags
    if "--config" in argv:
        cfg_path = argv[argv.index("--config") + 1]
        try:
            defaults = _load_config_file(cfg_path)
            parser.set_defaults(**defaults)
            for sub in parser._command_parsers:
                sub.set_defaults(**defaults)
        except FileNotFoundError:
            print(f"error: config file not found: {cfg_path}", file=sys.stderr)
            return 2
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, FileNotFoundError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except (DataError, LabelAttnError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
