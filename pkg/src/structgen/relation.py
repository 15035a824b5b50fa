"""Relation encoders: map a structural label sequence to a d_z vector.

Five interchangeable variants (selected by config key ``relation_method``):

  feature -- the whole path as one string feature with a learned embedding,
             capped vocabulary, everything else mapped to UNK;
  avg     -- mean of the label embeddings;
  sum     -- sum of the label embeddings;
  sa      -- a small self-attention over (label + position) embeddings,
             pooled by a learned attention vector;
  cnn     -- width-4 ReLU convolution over the padded label embeddings.

One encoder instance is shared by all attention heads and layers; a batch's
paths are deduplicated before encoding since the n x n matrix repeats few
distinct sequences.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .autodiff import Tensor, concat, softmax
from .numerics import init_params
from .pipeline import PATH_PAD

VARIANTS = ("feature", "avg", "sum", "sa", "cnn")
FEATURE_UNK = 0
CNN_KERNEL_WIDTH = 4


@dataclass
class RelationEncoder:
    variant: str
    d_z: int
    num_labels: int
    max_len: int = 4
    d_w: int = 128
    # feature variant: joined label-id tuples -> feature id (0 reserved UNK)
    feature_index: dict[tuple[int, ...], int] = field(default_factory=dict)

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown relation method {self.variant!r}")
        if self.variant == "cnn" and self.max_len > CNN_KERNEL_WIDTH:
            raise ValueError("cnn variant requires max_len <= kernel width 4")

    # ---- parameters ------------------------------------------------------

    def init(self, seed: int) -> dict[str, Tensor]:
        p: dict[str, np.ndarray] = {}
        if self.variant == "feature":
            rows = len(self.feature_index) + 1  # +UNK
            p["rel.features"] = init_params((rows, self.d_z), seed)
        else:
            p["rel.labels"] = init_params((self.num_labels, self.d_z), seed)
        if self.variant == "sa":
            p["rel.pos"] = init_params((self.max_len, self.d_z), seed + 1)
            p["rel.Wq"] = init_params((self.d_z, self.d_z), seed + 2)
            p["rel.Wk"] = init_params((self.d_z, self.d_z), seed + 3)
            p["rel.Wv"] = init_params((self.d_z, self.d_z), seed + 4)
            p["rel.W1"] = init_params((self.d_w, self.d_z), seed + 5)
            p["rel.W2"] = init_params((self.d_w,), seed + 6)
        if self.variant == "cnn":
            p["rel.kernel"] = init_params(
                (CNN_KERNEL_WIDTH * self.d_z, self.d_z), seed + 7
            )
            p["rel.bias"] = np.zeros(self.d_z)
        return {k: Tensor(v, requires_grad=True) for k, v in p.items()}

    # ---- encoding --------------------------------------------------------

    def encode_batch(
        self, params: dict[str, Tensor], path_ids: np.ndarray, lengths: np.ndarray
    ) -> Tensor:
        """Encode P paths given as an (P, max_len) id array padded with the
        PAD-label id; returns a (P, d_z) Tensor."""
        path_ids = np.asarray(path_ids)
        lengths = np.asarray(lengths)
        if np.any(lengths < 1):
            raise ValueError("empty path")
        fn = getattr(self, f"_encode_{self.variant}")
        return fn(params, path_ids, lengths)

    def encode(self, params: dict[str, Tensor], path_ids) -> np.ndarray:
        """Single-path convenience wrapper returning a plain d_z vector."""
        ids = list(path_ids)[: self.max_len]
        length = len(ids)
        row = np.full((1, self.max_len), PATH_PAD, dtype=np.int64)
        row[0, :length] = ids
        return self.encode_batch(params, row, np.array([length])).data[0]

    def _encode_feature(self, params, path_ids, lengths):
        fids = np.array(
            [
                self.feature_index.get(tuple(int(x) for x in row[:k]), FEATURE_UNK)
                for row, k in zip(path_ids, lengths)
            ]
        )
        return params["rel.features"].take(fids)

    def _label_embed(self, params, path_ids):
        return params["rel.labels"].take(path_ids)  # (P, L, d_z)

    def _mask(self, path_ids, lengths):
        pos = np.arange(path_ids.shape[1])
        return (pos[None, :] < lengths[:, None]).astype(np.float64)

    def _encode_sum(self, params, path_ids, lengths):
        emb = self._label_embed(params, path_ids)
        mask = Tensor(self._mask(path_ids, lengths)[:, :, None])
        return (emb * mask).sum(axis=1)

    def _encode_avg(self, params, path_ids, lengths):
        total = self._encode_sum(params, path_ids, lengths)
        return total / Tensor(lengths[:, None].astype(np.float64))

    def _sa_single(self, params, row, k: int):
        """One path through the SA pipeline; returns (alpha (1, k), h (k, d_z))."""
        e = params["rel.labels"].take(row[:k]) + params["rel.pos"][:k]  # (k, d_z)
        q = e @ params["rel.Wq"]
        key = e @ params["rel.Wk"]
        v = e @ params["rel.Wv"]
        att = softmax(q @ key.transpose() / np.sqrt(self.d_z), axis=-1)
        h = att @ v  # (k, d_z)
        scores = params["rel.W2"].reshape(1, -1) @ (
            params["rel.W1"] @ h.transpose()
        ).tanh()  # (1, k)
        return softmax(scores, axis=-1), h

    def sa_weights(self, params, path_ids) -> np.ndarray:
        """Pooling attention weights for a single path (length-k vector)."""
        row = np.asarray(list(path_ids))
        alpha, _ = self._sa_single(params, row, len(row))
        return alpha.data[0]

    def _encode_sa(self, params, path_ids, lengths):
        outs = []
        for row, k in zip(path_ids, lengths):
            alpha, h = self._sa_single(params, row, int(k))
            outs.append(alpha @ h)  # (1, d_z)
        return concat(outs, axis=0)

    def _encode_cnn(self, params, path_ids, lengths):
        if path_ids.shape[1] < CNN_KERNEL_WIDTH:
            pad = np.full(
                (path_ids.shape[0], CNN_KERNEL_WIDTH - path_ids.shape[1]),
                PATH_PAD,
                dtype=path_ids.dtype,
            )
            path_ids = np.concatenate([path_ids, pad], axis=1)
        emb = self._label_embed(params, path_ids)  # (P, 4, d_z)
        flat = emb.reshape(emb.shape[0], CNN_KERNEL_WIDTH * self.d_z)
        return (flat @ params["rel.kernel"] + params["rel.bias"]).relu()


def build_feature_index(
    path_id_rows: list[tuple[int, ...]], max_features: int = 20000
) -> dict[tuple[int, ...], int]:
    """Frequency-capped feature vocabulary over joined paths; id 0 is UNK."""
    from collections import Counter

    counts = Counter(path_id_rows)
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    return {key: i + 1 for i, (key, _) in enumerate(ranked[:max_features])}
