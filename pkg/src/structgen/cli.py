"""Command-line surface: preprocess, train, generate, evaluate,
inspect-paths and synth subcommands.

Every hyperparameter is settable by flag or config file; flags win.
Environment variables with the ``STRUCTGEN_`` prefix mirror the flags
(e.g. ``STRUCTGEN_SEED=7`` supplies ``--seed 7`` unless the flag is given).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import amr as amr_mod
from . import evaluate as eval_mod
from .bpe import BpeModel, SEPARATOR, apply_bpe, rejoin, train_bpe
from .model import ModelConfig, generate, init_model
from .numerics import load_checkpoint, save_checkpoint
from .paths import extract_paths, mask_indirect
from .pipeline import (
    Record,
    build_path_label_vocab,
    linearize_full,
    read_records,
    structural_record,
    write_records,
)
from .relation import RelationEncoder, build_feature_index
from .synthetic import write_corpus
from .training import TrainSettings, train
from .vocab import BOS, EOS, Vocabulary, build_vocab
from .autodiff import Tensor

ENV_PREFIX = "STRUCTGEN_"


def _env_default(name: str, cast, fallback):
    raw = os.environ.get(ENV_PREFIX + name.upper().replace("-", "_"))
    if raw is None:
        return fallback
    if cast is bool:
        return raw.lower() in ("1", "true", "yes")
    return cast(raw)


def _is_structure_token(tok: str) -> bool:
    return tok.startswith(":") or tok in ("(", ")")


def cmd_preprocess(args) -> int:
    out = Path(args.outdir)
    out.mkdir(parents=True, exist_ok=True)
    try:
        graphs = amr_mod.read_amr_file(args.amr_file)
    except amr_mod.PenmanError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    graphs = [amr_mod.simplify(g) for g in graphs]
    for i, g in enumerate(graphs):
        if g.sentence is None:
            print(f"error: graph {i} has no '# ::snt' reference", file=sys.stderr)
            return 1

    targets = [g.sentence.split() for g in graphs]
    concept_lists = [list(g.nodes.values()) for g in graphs]
    bpe_model = train_bpe(targets + concept_lists, args.bpe_merges)
    bpe_model.save(str(out / "bpe.model"))

    def seg_tokens(tokens):
        pieces = []
        for t in tokens:
            if _is_structure_token(t):
                pieces.append(t)
            else:
                pieces.extend(apply_bpe(t, bpe_model))
        return pieces

    baseline_srcs = [seg_tokens(linearize_full(g)) for g in graphs]
    target_pieces = [seg_tokens(t) for t in targets]
    from .pipeline import extend_graph_subwords, linearize_concepts, segment_graph

    extended = [extend_graph_subwords(g, segment_graph(g, bpe_model)) for g in graphs]
    struct_inputs = [linearize_concepts(g) for g in extended]
    matrices = [
        extract_paths(g, order, max_len=args.max_path_len)
        for g, (_, order) in zip(extended, struct_inputs)
    ]
    if args.mask_indirect:
        matrices = [mask_indirect(pm, g) for pm, g in zip(matrices, extended)]

    vocab = build_vocab(
        baseline_srcs + [c for c, _ in struct_inputs] + target_pieces,
        max_size=args.vocab_size,
    )
    vocab.save(str(out / "vocab.txt"))

    labels = build_path_label_vocab(matrices)
    (out / "path_labels.txt").write_text("\n".join(labels) + "\n", encoding="utf-8")
    label_index = {lab: i for i, lab in enumerate(labels)}

    from .pipeline import encode_paths

    struct_records = []
    path_rows = []
    for (concepts, _), pm, tgt in zip(struct_inputs, matrices, target_pieces):
        flat = encode_paths(pm, label_index, args.max_path_len)
        rec = Record(
            src=vocab.ids(concepts),
            tgt=[BOS] + vocab.ids(tgt) + [EOS],
            n=len(concepts),
            paths=flat,
            max_len=args.max_path_len,
        )
        struct_records.append(rec)
        arr = np.asarray(flat).reshape(len(concepts), len(concepts), args.max_path_len)
        from .pipeline import PATH_PAD

        for row in arr.reshape(-1, args.max_path_len):
            key = tuple(int(x) for x in row[row != PATH_PAD])
            path_rows.append(key)
    feature_index = build_feature_index(path_rows, max_features=args.max_features)
    with open(out / "features.json", "w", encoding="utf-8") as fh:
        json.dump([[list(k), v] for k, v in feature_index.items()], fh)

    baseline_records = [
        Record(src=vocab.ids(src), tgt=[BOS] + vocab.ids(tgt) + [EOS])
        for src, tgt in zip(baseline_srcs, target_pieces)
    ]
    write_records(str(out / "structural.jsonl"), struct_records)
    write_records(str(out / "baseline.jsonl"), baseline_records)
    with open(out / "references.txt", "w", encoding="utf-8") as fh:
        for t in targets:
            fh.write(" ".join(t) + "\n")
    print(f"wrote {len(graphs)} examples to {out}")
    return 0


def _load_feature_index(path: str) -> dict[tuple[int, ...], int]:
    with open(path, encoding="utf-8") as fh:
        entries = json.load(fh)
    return {tuple(k): v for k, v in entries}


def _build_config(args) -> ModelConfig:
    if args.config:
        cfg = ModelConfig.from_file(args.config)
    else:
        cfg = ModelConfig()
    if args.relation_method:
        cfg.relation_method = args.relation_method
    if args.structure_aware is not None:
        cfg.structure_aware = args.structure_aware
    if args.max_path_len:
        cfg.max_path_len = args.max_path_len
    return cfg


def _make_rel_encoder(cfg: ModelConfig, datadir: Path) -> RelationEncoder | None:
    if not cfg.structure_aware:
        return None
    labels = (datadir / "path_labels.txt").read_text(encoding="utf-8").splitlines()
    feature_index = {}
    feat_file = datadir / "features.json"
    if cfg.relation_method == "feature":
        feature_index = _load_feature_index(str(feat_file))
    return RelationEncoder(
        variant=cfg.relation_method,
        d_z=cfg.d_z,
        num_labels=len(labels),
        max_len=cfg.max_path_len,
        d_w=cfg.d_w,
        feature_index=feature_index,
    )


def cmd_train(args) -> int:
    datadir = Path(args.data).parent
    records = read_records(args.data)
    cfg = _build_config(args)
    has_paths = records[0].paths is not None
    if cfg.structure_aware and not has_paths:
        print("error: structure_aware=true but dataset has no paths", file=sys.stderr)
        return 1
    if not cfg.structure_aware and has_paths:
        print("warning: structural dataset with structure_aware=false", file=sys.stderr)
    vocab = Vocabulary.load(str(datadir / "vocab.txt"))
    rel_encoder = _make_rel_encoder(cfg, datadir)
    params = init_model(cfg, len(vocab), args.seed, rel_encoder)
    settings = TrainSettings(
        steps=args.steps,
        max_tokens=args.max_tokens,
        smoothing=args.smoothing,
        seed=args.seed,
        checkpoint_path=args.checkpoint,
        log_path=args.log,
    )
    metrics = train(records, cfg, params, rel_encoder, settings)
    save_checkpoint(
        args.checkpoint,
        params,
        meta={"config": json.dumps(cfg.__dict__), "step": metrics["step"]},
    )
    print(json.dumps(metrics))
    return 0


def _load_model(checkpoint: str, datadir: Path):
    arrays, meta = load_checkpoint(checkpoint)
    cfg = ModelConfig(**json.loads(str(meta["config"])))
    params = {k: Tensor(v, requires_grad=True) for k, v in arrays.items()}
    rel_encoder = _make_rel_encoder(cfg, datadir)
    return params, cfg, rel_encoder


def cmd_generate(args) -> int:
    datadir = Path(args.data).parent
    records = read_records(args.data)
    vocab = Vocabulary.load(str(datadir / "vocab.txt"))
    params, cfg, rel_encoder = _load_model(args.checkpoint, datadir)
    out_fh = open(args.out, "w", encoding="utf-8") if args.out else sys.stdout
    for rec in records:
        ids = generate(params, cfg, rec, rel_encoder, beam=args.beam, max_len=args.max_len)
        words = rejoin(vocab.decode(ids), SEPARATOR)
        print(" ".join(words), file=out_fh)
    if args.out:
        out_fh.close()
    return 0


def _read_sentences(path: str) -> list[list[str]]:
    with open(path, encoding="utf-8") as fh:
        return [line.split() for line in fh.read().splitlines()]


def cmd_evaluate(args) -> int:
    hyps = _read_sentences(args.hyp)
    refs = _read_sentences(args.ref)
    if len(hyps) != len(refs):
        print("error: hypothesis/reference length mismatch", file=sys.stderr)
        return 1
    score = eval_mod.bleu(hyps, refs)
    ratio = eval_mod.length_ratio(hyps, refs)
    print(f"BLEU {score:.2f}")
    print(f"length ratio {ratio:.3f}")
    if args.graphs:
        graphs = [amr_mod.simplify(g) for g in amr_mod.read_amr_file(args.graphs)]
        report = eval_mod.bucket_report(graphs, hyps, refs, mode=args.buckets)
        print(report.table())
        if args.csv:
            Path(args.csv).write_text(report.csv() + "\n", encoding="utf-8")
    return 0


def cmd_inspect_paths(args) -> int:
    graphs = amr_mod.read_amr_file(args.amr_file)
    g = amr_mod.simplify(graphs[args.index])
    from .pipeline import linearize_concepts

    concepts, order = linearize_concepts(g)
    pm = extract_paths(g, order, max_len=args.max_path_len)
    if args.mask_indirect:
        pm = mask_indirect(pm, g)

    def position(concept: str) -> int:
        if concept not in concepts:
            print(f"error: concept {concept!r} not in graph", file=sys.stderr)
            raise SystemExit(1)
        return concepts.index(concept)

    i, j = position(args.source), position(args.target)
    print(" ".join(pm.entry(i, j)))
    return 0


def cmd_synth(args) -> int:
    write_corpus(args.out, count=args.count, seed=args.seed)
    print(f"wrote {args.count} synthetic examples to {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="structgen")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--seed", type=int, default=_env_default("seed", int, 0))
        p.add_argument("--config", default=_env_default("config", str, None))
        p.add_argument(
            "--relation-method",
            choices=["feature", "avg", "sum", "sa", "cnn"],
            default=_env_default("relation_method", str, None),
        )
        p.add_argument(
            "--structure-aware",
            type=lambda s: s.lower() in ("1", "true", "yes"),
            default=_env_default("structure_aware", bool, None),
        )
        p.add_argument(
            "--max-path-len", type=int, default=_env_default("max_path_len", int, 4)
        )

    p = sub.add_parser("preprocess", help="build BPE, vocab and dataset records")
    p.add_argument("amr_file")
    p.add_argument("--outdir", required=True)
    p.add_argument("--bpe-merges", type=int, default=_env_default("bpe_merges", int, 10000))
    p.add_argument("--vocab-size", type=int, default=None)
    p.add_argument("--max-features", type=int, default=20000)
    p.add_argument("--mask-indirect", action="store_true")
    common(p)
    p.set_defaults(func=cmd_preprocess)

    p = sub.add_parser("train", help="train a model on preprocessed records")
    p.add_argument("--data", required=True)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--steps", type=int, default=2000)
    p.add_argument("--max-tokens", type=int, default=1024)
    p.add_argument("--smoothing", type=float, default=0.1)
    p.add_argument("--log", default=None)
    common(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("generate", help="decode a dataset with a checkpoint")
    p.add_argument("--data", required=True)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--beam", type=int, default=_env_default("beam", int, 1))
    p.add_argument("--max-len", type=int, default=64)
    p.add_argument("--out", default=None)
    common(p)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("evaluate", help="score hypotheses against references")
    p.add_argument("--hyp", required=True)
    p.add_argument("--ref", required=True)
    p.add_argument("--graphs", default=None)
    p.add_argument(
        "--buckets",
        choices=["reentrancy", "size"],
        default=_env_default("buckets", str, "reentrancy"),
    )
    p.add_argument("--csv", default=None)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("inspect-paths", help="print the structural path of a pair")
    p.add_argument("amr_file")
    p.add_argument("source")
    p.add_argument("target")
    p.add_argument("--index", type=int, default=0)
    p.add_argument("--mask-indirect", action="store_true")
    common(p)
    p.set_defaults(func=cmd_inspect_paths)

    p = sub.add_parser("synth", help="emit the deterministic synthetic corpus")
    p.add_argument("--out", required=True)
    p.add_argument("--count", type=int, default=100)
    p.add_argument("--seed", type=int, default=_env_default("seed", int, 13))
    p.set_defaults(func=cmd_synth)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (OSError, ValueError, amr_mod.PenmanError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
