"""Numeric utilities shared by every module: stable softmax, seeded
parameter initialization, checkpoint IO and the finite-difference gradient
checker that the verification suite is built on."""

from __future__ import annotations

from typing import Callable, Mapping

import numpy as np

from .autodiff import Tensor

CHECKPOINT_VERSION = 1


def softmax(v: np.ndarray, axis: int = -1) -> np.ndarray:
    """Stable softmax (max-subtraction); rows sum to 1."""
    v = np.asarray(v, dtype=np.float64)
    if v.size == 0:
        raise ValueError("softmax of an empty array")
    shifted = v - v.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=axis, keepdims=True)


def init_params(shape: tuple[int, ...], seed: int) -> np.ndarray:
    """Uniform init in (-1/sqrt(fan_in), 1/sqrt(fan_in)); bit-reproducible
    for a given seed."""
    if not shape or 0 in shape:
        raise ValueError(f"invalid shape {shape}")
    rng = np.random.default_rng(seed)
    bound = 1.0 / np.sqrt(shape[0])
    return rng.uniform(-bound, bound, size=shape)


def save_checkpoint(path: str, params: Mapping[str, Tensor | np.ndarray], meta: dict | None = None) -> None:
    """Write parameters to an .npz container; float64 round-trips bit-exactly.

    Layout: one array per parameter name, plus ``__version__`` and optional
    ``__meta_<key>__`` scalars/strings.
    """
    arrays = {
        name: (p.data if isinstance(p, Tensor) else np.asarray(p))
        for name, p in params.items()
    }
    arrays["__version__"] = np.asarray(CHECKPOINT_VERSION)
    for key, value in (meta or {}).items():
        arrays[f"__meta_{key}__"] = np.asarray(value)
    np.savez(path, **arrays)


def load_checkpoint(path: str) -> tuple[dict[str, np.ndarray], dict[str, object]]:
    with np.load(path, allow_pickle=False) as data:
        version = int(data["__version__"])
        if version != CHECKPOINT_VERSION:
            raise ValueError(f"unsupported checkpoint version {version}")
        params: dict[str, np.ndarray] = {}
        meta: dict[str, object] = {}
        for name in data.files:
            if name == "__version__":
                continue
            if name.startswith("__meta_"):
                meta[name[len("__meta_"):-2]] = data[name][()]
            else:
                params[name] = data[name]
    return params, meta


def grad_check(
    f: Callable[[dict[str, Tensor]], Tensor],
    params: Mapping[str, np.ndarray],
    step: float = 1e-5,
    max_entries_per_param: int | None = None,
    seed: int = 0,
) -> float:
    """Max relative error between analytic and central-difference gradients.

    ``f`` maps a dict of Tensors (requires_grad set) to a scalar Tensor.
    With ``max_entries_per_param`` set, a seeded random subset of entries is
    probed per parameter; otherwise every entry is.
    """
    if step <= 0:
        raise ValueError("step must be positive")
    tensors = {k: Tensor(v.copy(), requires_grad=True) for k, v in params.items()}
    out = f(tensors)
    if out.data.size != 1:
        raise ValueError("f must return a scalar")
    out.backward()
    analytic = {
        k: (t.grad if t.grad is not None else np.zeros_like(t.data))
        for k, t in tensors.items()
    }

    rng = np.random.default_rng(seed)
    worst = 0.0
    for name, t in tensors.items():
        flat = t.data.reshape(-1)
        size = flat.size
        if max_entries_per_param is not None and size > max_entries_per_param:
            idxs = rng.choice(size, size=max_entries_per_param, replace=False)
        else:
            idxs = np.arange(size)
        for i in idxs:
            orig = flat[i]
            flat[i] = orig + step
            hi = float(f(tensors).data)
            flat[i] = orig - step
            lo = float(f(tensors).data)
            flat[i] = orig
            if not (np.isfinite(hi) and np.isfinite(lo)):
                raise FloatingPointError(f"non-finite f while perturbing {name}[{i}]")
            numeric = (hi - lo) / (2 * step)
            a = analytic[name].reshape(-1)[i]
            # the floor keeps near-zero entries, where central differences
            # are dominated by cancellation noise, from inflating the error
            err = abs(a - numeric) / max(abs(a), abs(numeric), 1e-6)
            worst = max(worst, err)
    return worst
