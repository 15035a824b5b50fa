"""Encoder-decoder Transformer with optional structure-aware self-attention.

The encoder's self-attention can inject a learned relation vector r_ij per
element pair: the attention score becomes
(x_i Wq)(x_j Wk + r_ij Wr)^T / sqrt(d_z) and the weighted sum picks up an
extra alpha_ij (r_ij Wf) term. r_ij is shared across heads; each head owns
its Wr and Wf. Decoder and cross-attention stay standard.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields

import numpy as np

from .autodiff import Tensor, concat, layer_norm, log_softmax, softmax
from .numerics import init_params
from .pipeline import PATH_PAD, Record
from .relation import RelationEncoder
from .vocab import BOS, EOS, PAD

NEG_INF = -1e9


@dataclass
class ModelConfig:
    num_layers: int = 2
    num_heads: int = 4
    d_model: int = 128
    d_ff: int = 512
    dropout: float = 0.1
    max_seq_len: int = 256
    max_path_len: int = 4
    relation_method: str = "sum"
    structure_aware: bool = True
    d_w: int = 128

    def __post_init__(self):
        if self.d_model % self.num_heads:
            raise ValueError("d_model must be divisible by num_heads")

    @property
    def d_z(self) -> int:
        return self.d_model // self.num_heads

    @classmethod
    def published_scale(cls) -> "ModelConfig":
        return cls(num_layers=6, num_heads=8, d_model=512, d_ff=2048)

    @classmethod
    def from_file(cls, path: str) -> "ModelConfig":
        values: dict[str, object] = {}
        types = {f.name: f.type for f in fields(cls)}
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                line = line.split("#")[0].strip()
                if not line:
                    continue
                key, _, raw = line.partition("=")
                key, raw = key.strip(), raw.strip()
                if key not in types:
                    raise ValueError(f"unknown config key {key!r}")
                values[key] = _parse_value(key, raw)
        return cls(**values)

    def to_file(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for f in fields(self):
                fh.write(f"{f.name}={getattr(self, f.name)}\n")


def _parse_value(key: str, raw: str):
    if key == "relation_method":
        return raw
    if key == "structure_aware":
        return raw.lower() in ("1", "true", "yes")
    if key == "dropout":
        return float(raw)
    return int(raw)


@dataclass
class Batch:
    src: np.ndarray                 # (B, n) int
    src_mask: np.ndarray            # (B, n) 1.0 = real token
    tgt_in: np.ndarray              # (B, m) BOS-prefixed
    tgt_out: np.ndarray             # (B, m) EOS-suffixed
    tgt_mask: np.ndarray            # (B, m)
    path_ids: np.ndarray | None = None  # (B, n, n, L)

    @property
    def num_target_tokens(self) -> int:
        return int(self.tgt_mask.sum())


def make_batch(records: list[Record], max_path_len: int | None = None) -> Batch:
    b = len(records)
    n = max(len(r.src) for r in records)
    m = max(len(r.tgt) for r in records) - 1
    src = np.full((b, n), PAD, dtype=np.int64)
    src_mask = np.zeros((b, n))
    tgt_in = np.full((b, m), PAD, dtype=np.int64)
    tgt_out = np.full((b, m), PAD, dtype=np.int64)
    tgt_mask = np.zeros((b, m))
    has_paths = all(r.paths is not None for r in records)
    L = max_path_len or (records[0].max_len if has_paths else 0)
    path_ids = np.full((b, n, n, L), PATH_PAD, dtype=np.int64) if has_paths else None
    for i, r in enumerate(records):
        k = len(r.src)
        src[i, :k] = r.src
        src_mask[i, :k] = 1.0
        t = len(r.tgt) - 1
        tgt_in[i, :t] = r.tgt[:-1]
        tgt_out[i, :t] = r.tgt[1:]
        tgt_mask[i, :t] = 1.0
        if has_paths:
            arr = np.asarray(r.paths, dtype=np.int64).reshape(r.n, r.n, r.max_len)
            path_ids[i, :k, :k, : r.max_len] = arr
    return Batch(src, src_mask, tgt_in, tgt_out, tgt_mask, path_ids)


# ---- parameters ----------------------------------------------------------


def init_model(
    cfg: ModelConfig,
    vocab_size: int,
    seed: int,
    rel_encoder: RelationEncoder | None = None,
) -> dict[str, Tensor]:
    """All learnable weights, named; relation-encoder weights live under the
    'rel.' prefix when structure-aware."""
    d, dz, dff = cfg.d_model, cfg.d_z, cfg.d_ff
    p: dict[str, np.ndarray] = {}
    s = seed

    def nxt(shape):
        nonlocal s
        s += 1
        return init_params(shape, s)

    p["embed"] = nxt((vocab_size, d))
    p["out_proj"] = nxt((d, vocab_size))
    p["out_bias"] = np.zeros(vocab_size)

    def attn_block(prefix, structural):
        for h in range(cfg.num_heads):
            p[f"{prefix}.Wq{h}"] = nxt((d, dz))
            p[f"{prefix}.Wk{h}"] = nxt((d, dz))
            p[f"{prefix}.Wv{h}"] = nxt((d, dz))
            if structural:
                p[f"{prefix}.Wr{h}"] = nxt((dz, dz))
                p[f"{prefix}.Wf{h}"] = nxt((dz, dz))
        p[f"{prefix}.Wo"] = nxt((d, d))

    def ffn_block(prefix):
        p[f"{prefix}.W1"] = nxt((d, dff))
        p[f"{prefix}.b1"] = np.zeros(dff)
        p[f"{prefix}.W2"] = nxt((dff, d))
        p[f"{prefix}.b2"] = np.zeros(d)

    def ln_block(prefix):
        p[f"{prefix}_g"] = np.ones(d)
        p[f"{prefix}_b"] = np.zeros(d)

    for i in range(cfg.num_layers):
        attn_block(f"enc{i}.self", cfg.structure_aware)
        ffn_block(f"enc{i}.ff")
        ln_block(f"enc{i}.ln1")
        ln_block(f"enc{i}.ln2")
    for i in range(cfg.num_layers):
        attn_block(f"dec{i}.self", False)
        attn_block(f"dec{i}.cross", False)
        ffn_block(f"dec{i}.ff")
        ln_block(f"dec{i}.ln1")
        ln_block(f"dec{i}.ln2")
        ln_block(f"dec{i}.ln3")

    params = {k: Tensor(v, requires_grad=True) for k, v in p.items()}
    if rel_encoder is not None and cfg.structure_aware:
        params.update(rel_encoder.init(seed + 10_000))
    return params


def sinusoid_positions(n: int, d: int) -> np.ndarray:
    pos = np.arange(n)[:, None]
    dim = np.arange(d // 2)[None, :]
    angle = pos / np.power(10000.0, 2 * dim / d)
    pe = np.zeros((n, d))
    pe[:, 0::2] = np.sin(angle)
    pe[:, 1::2] = np.cos(angle)
    return pe


# ---- attention -----------------------------------------------------------


def _key_bias(mask: np.ndarray | None, ndim: int) -> Tensor | None:
    """Additive bias from a key-side mask (..., n): NEG_INF on padding."""
    if mask is None:
        return None
    if np.any(mask.sum(axis=-1) == 0):
        raise ValueError("attention row with every position masked")
    bias = (1.0 - mask) * NEG_INF
    return Tensor(np.expand_dims(bias, -2))  # (..., 1, n)


def single_head_attention(
    x: Tensor,
    params: dict[str, Tensor],
    r: Tensor | None = None,
    mask: np.ndarray | None = None,
    kv: Tensor | None = None,
    score_bias: np.ndarray | None = None,
) -> Tensor:
    """One scaled dot-product attention head over x (..., n, d_x).

    ``r`` (..., n, n, d_z) switches on the structure-aware form; ``kv``
    supplies separate key/value inputs for cross-attention; ``score_bias``
    is an additive (n, n) term (causal masking).
    """
    source = kv if kv is not None else x
    q = x @ params["Wq"]
    k = source @ params["Wk"]
    v = source @ params["Wv"]
    dz = q.shape[-1]
    scores = (q @ _swap_last(k)) / np.sqrt(dz)
    if r is not None:
        rr = r @ params["Wr"]  # (..., n, n, d_z)
        q_exp = q.reshape(*q.shape[:-1], 1, dz)
        scores = scores + (q_exp * rr).sum(axis=-1) / np.sqrt(dz)
    if score_bias is not None:
        scores = scores + Tensor(score_bias)
    bias = _key_bias(mask, scores.data.ndim)
    if bias is not None:
        scores = scores + bias
    alpha = softmax(scores, axis=-1)
    z = alpha @ v
    if r is not None:
        rf = r @ params["Wf"]
        a_exp = alpha.reshape(*alpha.shape, 1)
        z = z + (a_exp * rf).sum(axis=-2)
    return z


def _swap_last(t: Tensor) -> Tensor:
    axes = list(range(t.data.ndim))
    axes[-1], axes[-2] = axes[-2], axes[-1]
    return t.transpose(*axes)


def attention_baseline(x: np.ndarray, head: dict[str, np.ndarray], mask=None) -> np.ndarray:
    """Standalone single-head baseline attention over an (n, d_x) input."""
    params = {k: Tensor(v) for k, v in head.items()}
    return single_head_attention(Tensor(x), params, mask=mask).data


def attention_structural(
    x: np.ndarray, r: np.ndarray, head: dict[str, np.ndarray], mask=None
) -> np.ndarray:
    """Standalone single-head structure-aware attention; r is (n, n, d_z)."""
    params = {k: Tensor(v) for k, v in head.items()}
    return single_head_attention(Tensor(x), params, r=Tensor(r), mask=mask).data


def multi_head(
    x: Tensor,
    params: dict[str, Tensor],
    prefix: str,
    num_heads: int,
    r: Tensor | None = None,
    mask: np.ndarray | None = None,
    kv: Tensor | None = None,
    score_bias: np.ndarray | None = None,
) -> Tensor:
    outs = []
    for h in range(num_heads):
        head = {k: params[f"{prefix}.{k}{h}"] for k in ("Wq", "Wk", "Wv")}
        if r is not None:
            head["Wr"] = params[f"{prefix}.Wr{h}"]
            head["Wf"] = params[f"{prefix}.Wf{h}"]
        outs.append(
            single_head_attention(x, head, r=r, mask=mask, kv=kv, score_bias=score_bias)
        )
    z = concat(outs, axis=-1)
    return z @ params[f"{prefix}.Wo"]


# ---- stacks --------------------------------------------------------------


def _ffn(x: Tensor, params: dict[str, Tensor], prefix: str) -> Tensor:
    h = (x @ params[f"{prefix}.W1"] + params[f"{prefix}.b1"]).relu()
    return h @ params[f"{prefix}.W2"] + params[f"{prefix}.b2"]


def _dropout(x: Tensor, rate: float, rng: np.random.Generator | None) -> Tensor:
    if rate <= 0 or rng is None:
        return x
    keep = (rng.random(x.shape) >= rate) / (1.0 - rate)
    return x * Tensor(keep)


def _embed(params, ids: np.ndarray, d_model: int) -> Tensor:
    x = params["embed"].take(ids) * np.sqrt(d_model)
    return x + Tensor(sinusoid_positions(ids.shape[-1], d_model))


def relation_tensor(
    rel_encoder: RelationEncoder,
    params: dict[str, Tensor],
    path_ids: np.ndarray,
) -> Tensor:
    """Encode the (B, n, n, L) path-id tensor into relation vectors
    (B, n, n, d_z), deduplicating identical paths first. All-pad rows
    (batch padding) are treated as the length-1 PAD path."""
    b, n, _, L = path_ids.shape
    flat = path_ids.reshape(-1, L)
    unique, inverse = np.unique(flat, axis=0, return_inverse=True)
    lengths = (unique != PATH_PAD).sum(axis=1)
    lengths = np.maximum(lengths, 1)
    encoded = rel_encoder.encode_batch(params, unique, lengths)  # (P, d_z)
    return encoded.take(inverse).reshape(b, n, n, rel_encoder.d_z)


def encode(
    params: dict[str, Tensor],
    cfg: ModelConfig,
    src_ids: np.ndarray,
    src_mask: np.ndarray,
    r: Tensor | None = None,
    rng: np.random.Generator | None = None,
) -> Tensor:
    """Encoder stack: (B, n) ids -> (B, n, d_model). ``r`` activates the
    structure-aware form in every layer."""
    if src_ids.shape[-1] > cfg.max_seq_len:
        raise ValueError("source sequence exceeds max_seq_len")
    if src_ids.size == 0:
        raise ValueError("empty source batch")
    x = _dropout(_embed(params, src_ids, cfg.d_model), cfg.dropout, rng)
    for i in range(cfg.num_layers):
        a = multi_head(x, params, f"enc{i}.self", cfg.num_heads, r=r, mask=src_mask)
        x = layer_norm(
            x + _dropout(a, cfg.dropout, rng),
            params[f"enc{i}.ln1_g"],
            params[f"enc{i}.ln1_b"],
        )
        f = _ffn(x, params, f"enc{i}.ff")
        x = layer_norm(
            x + _dropout(f, cfg.dropout, rng),
            params[f"enc{i}.ln2_g"],
            params[f"enc{i}.ln2_b"],
        )
    return x


def decode(
    params: dict[str, Tensor],
    cfg: ModelConfig,
    tgt_ids: np.ndarray,
    memory: Tensor,
    src_mask: np.ndarray,
    rng: np.random.Generator | None = None,
) -> Tensor:
    """Decoder stack with causal self-attention; returns logits (B, m, V)."""
    m = tgt_ids.shape[-1]
    causal = np.triu(np.full((m, m), NEG_INF), k=1)
    y = _dropout(_embed(params, tgt_ids, cfg.d_model), cfg.dropout, rng)
    for i in range(cfg.num_layers):
        a = multi_head(y, params, f"dec{i}.self", cfg.num_heads, score_bias=causal)
        y = layer_norm(
            y + _dropout(a, cfg.dropout, rng),
            params[f"dec{i}.ln1_g"],
            params[f"dec{i}.ln1_b"],
        )
        c = multi_head(
            y, params, f"dec{i}.cross", cfg.num_heads, kv=memory, mask=src_mask
        )
        y = layer_norm(
            y + _dropout(c, cfg.dropout, rng),
            params[f"dec{i}.ln2_g"],
            params[f"dec{i}.ln2_b"],
        )
        f = _ffn(y, params, f"dec{i}.ff")
        y = layer_norm(
            y + _dropout(f, cfg.dropout, rng),
            params[f"dec{i}.ln3_g"],
            params[f"dec{i}.ln3_b"],
        )
    return y @ params["out_proj"] + params["out_bias"]


def forward(
    params: dict[str, Tensor],
    cfg: ModelConfig,
    batch: Batch,
    rel_encoder: RelationEncoder | None = None,
    rng: np.random.Generator | None = None,
) -> Tensor:
    r = None
    if cfg.structure_aware:
        if rel_encoder is None or batch.path_ids is None:
            raise ValueError("structure-aware model needs paths and an encoder")
        r = relation_tensor(rel_encoder, params, batch.path_ids)
    memory = encode(params, cfg, batch.src, batch.src_mask, r=r, rng=rng)
    return decode(params, cfg, batch.tgt_in, memory, batch.src_mask, rng=rng)


# ---- generation ----------------------------------------------------------


def generate(
    params: dict[str, Tensor],
    cfg: ModelConfig,
    record: Record,
    rel_encoder: RelationEncoder | None = None,
    beam: int = 1,
    max_len: int = 64,
) -> list[int]:
    """Autoregressive generation for one example; beam == 1 is greedy.
    Beam scores are length-normalized log-probabilities."""
    if beam < 1:
        raise ValueError("beam width must be >= 1")
    batch = make_batch([record])
    r = None
    if cfg.structure_aware:
        if rel_encoder is None or batch.path_ids is None:
            raise ValueError("structure-aware model needs paths and an encoder")
        r = relation_tensor(rel_encoder, params, batch.path_ids)
    memory = encode(params, cfg, batch.src, batch.src_mask, r=r)

    hyps: list[tuple[list[int], float, bool]] = [([BOS], 0.0, False)]
    for _ in range(max_len):
        if all(done for _, _, done in hyps):
            break
        candidates: list[tuple[list[int], float, bool]] = []
        for seq, score, done in hyps:
            if done:
                candidates.append((seq, score, True))
                continue
            tgt = np.array([seq], dtype=np.int64)
            logits = decode(params, cfg, tgt, memory, batch.src_mask)
            logp = log_softmax(logits, axis=-1).data[0, -1]
            top = np.argsort(-logp)[:beam]
            for tok in top:
                candidates.append(
                    (seq + [int(tok)], score + float(logp[tok]), int(tok) == EOS)
                )
        candidates.sort(key=lambda c: -c[1] / (len(c[0]) - 1))
        hyps = candidates[:beam]
    best = max(hyps, key=lambda c: c[1] / (len(c[0]) - 1))
    seq = best[0][1:]
    if seq and seq[-1] == EOS:
        seq = seq[:-1]
    return seq
