"""Optimization: label-smoothed cross-entropy, Adam with a warmup /
inverse-square-root schedule, token-count batching and checkpointing."""

from __future__ import annotations

import json
import sys
from dataclasses import dataclass, field

import numpy as np

from .autodiff import Tensor, log_softmax
from .model import Batch, ModelConfig, forward, make_batch
from .numerics import save_checkpoint
from .pipeline import Record
from .relation import RelationEncoder


def cross_entropy(
    logits: Tensor, targets: np.ndarray, mask: np.ndarray, smoothing: float = 0.0
) -> Tensor:
    """Mean token-level NLL over unmasked positions with label smoothing:
    the true distribution puts 1-s on the target and s/V uniformly."""
    if not 0 <= smoothing < 1:
        raise ValueError("smoothing must be in [0, 1)")
    vocab = logits.shape[-1]
    if targets.max() >= vocab:
        raise ValueError("target id out of vocabulary range")
    logp = log_softmax(logits, axis=-1)
    b, m = targets.shape
    picked = logp[np.arange(b)[:, None], np.arange(m)[None, :], targets]  # (B, m)
    mask_t = Tensor(mask)
    count = mask.sum()
    if count == 0:
        raise ValueError("no unmasked target positions")
    nll = -(picked * mask_t).sum() / count
    if smoothing == 0:
        return nll
    uniform = -(logp.sum(axis=-1) * mask_t).sum() / (count * vocab)
    return (1 - smoothing) * nll + smoothing * uniform


@dataclass
class OptimizerState:
    beta1: float = 0.9
    beta2: float = 0.98
    eps: float = 1e-9
    lr_factor: float = 2.0
    warmup: int = 400
    d_model: int = 128
    step: int = 0
    m: dict[str, np.ndarray] = field(default_factory=dict)
    v: dict[str, np.ndarray] = field(default_factory=dict)

    def learning_rate(self, step: int | None = None) -> float:
        s = max(1, self.step if step is None else step)
        return (
            self.lr_factor
            * self.d_model**-0.5
            * min(s**-0.5, s * self.warmup**-1.5)
        )


def adam_step(
    params: dict[str, Tensor],
    grads: dict[str, np.ndarray],
    state: OptimizerState,
    lr: float | None = None,
) -> None:
    """In-place bias-corrected Adam update; rejects non-finite gradients."""
    for name, g in grads.items():
        if not np.all(np.isfinite(g)):
            raise FloatingPointError(f"non-finite gradient for {name}")
    state.step += 1
    rate = state.learning_rate() if lr is None else lr
    b1, b2 = state.beta1, state.beta2
    for name, p in params.items():
        g = grads.get(name)
        if g is None:
            continue
        m = state.m.setdefault(name, np.zeros_like(p.data))
        v = state.v.setdefault(name, np.zeros_like(p.data))
        m[...] = b1 * m + (1 - b1) * g
        v[...] = b2 * v + (1 - b2) * g * g
        m_hat = m / (1 - b1**state.step)
        v_hat = v / (1 - b2**state.step)
        p.data = p.data - rate * m_hat / (np.sqrt(v_hat) + state.eps)


def token_batches(
    records: list[Record], max_tokens: int, rng: np.random.Generator | None = None
) -> list[list[Record]]:
    """Group records into batches bounded by target-token count; order is
    shuffled when an rng is given (deterministic for a fixed seed)."""
    order = list(range(len(records)))
    if rng is not None:
        rng.shuffle(order)
    batches: list[list[Record]] = []
    current: list[Record] = []
    tokens = 0
    for idx in order:
        r = records[idx]
        t = len(r.tgt)
        if current and tokens + t > max_tokens:
            batches.append(current)
            current, tokens = [], 0
        current.append(r)
        tokens += t
    if current:
        batches.append(current)
    return batches


def teacher_forced_accuracy(
    params, cfg: ModelConfig, batch: Batch, rel_encoder=None
) -> float:
    logits = forward(params, cfg, batch, rel_encoder=rel_encoder)
    pred = logits.data.argmax(axis=-1)
    hit = (pred == batch.tgt_out) * batch.tgt_mask
    return float(hit.sum() / batch.tgt_mask.sum())


@dataclass
class TrainSettings:
    steps: int = 2000
    max_tokens: int = 1024
    smoothing: float = 0.1
    seed: int = 0
    log_every: int = 100
    checkpoint_path: str | None = None
    log_path: str | None = None
    target_accuracy: float | None = None


def train(
    records: list[Record],
    cfg: ModelConfig,
    params: dict[str, Tensor],
    rel_encoder: RelationEncoder | None = None,
    settings: TrainSettings = TrainSettings(),
    state: OptimizerState | None = None,
) -> dict[str, float]:
    """Run the optimization loop; returns final metrics. The best-loss
    checkpoint is kept when a checkpoint path is given."""
    if not records:
        raise ValueError("empty dataset")
    if state is None:
        state = OptimizerState(d_model=cfg.d_model, warmup=400)
    rng = np.random.default_rng(settings.seed)
    log_fh = open(settings.log_path, "a", encoding="utf-8") if settings.log_path else None
    best_loss = float("inf")
    step = 0
    loss_value = float("nan")
    eval_batch = make_batch(records)
    while step < settings.steps:
        for group in token_batches(records, settings.max_tokens, rng):
            if step >= settings.steps:
                break
            batch = make_batch(group)
            logits = forward(params, cfg, batch, rel_encoder=rel_encoder)
            loss = cross_entropy(
                logits, batch.tgt_out, batch.tgt_mask, settings.smoothing
            )
            for p in params.values():
                p.zero_grad()
            loss.backward()
            grads = {
                k: p.grad for k, p in params.items() if p.grad is not None
            }
            adam_step(params, grads, state)
            step += 1
            loss_value = float(loss.data)
            if step % settings.log_every == 0 or step == settings.steps:
                acc = teacher_forced_accuracy(params, cfg, eval_batch, rel_encoder)
                entry = {
                    "step": step,
                    "loss": round(loss_value, 6),
                    "lr": round(state.learning_rate(), 8),
                    "accuracy": round(acc, 6),
                }
                line = json.dumps(entry)
                if log_fh:
                    log_fh.write(line + "\n")
                    log_fh.flush()
                else:
                    print(line, file=sys.stderr)
                if loss_value < best_loss and settings.checkpoint_path:
                    best_loss = loss_value
                    save_checkpoint(
                        settings.checkpoint_path, params, meta={"step": step}
                    )
                if (
                    settings.target_accuracy is not None
                    and acc >= settings.target_accuracy
                ):
                    if log_fh:
                        log_fh.close()
                    return {"step": step, "loss": loss_value, "accuracy": acc}
    acc = teacher_forced_accuracy(params, cfg, eval_batch, rel_encoder)
    if settings.checkpoint_path and (loss_value < best_loss or best_loss == float("inf")):
        save_checkpoint(settings.checkpoint_path, params, meta={"step": step})
    if log_fh:
        log_fh.close()
    return {"step": step, "loss": loss_value, "accuracy": acc}
