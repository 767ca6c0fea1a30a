"""AdamW with decoupled weight decay and the warmup + cosine learning-rate schedule."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .encoder import EncoderParams, Grads
from .errors import RBEError


@dataclass
class AdamWConfig:
    lr: float = 2e-5
    weight_decay: float = 0.01
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8


@dataclass
class AdamWState:
    m: list[np.ndarray]
    v: list[np.ndarray]
    step: int = 0

    @classmethod
    def zeros_like(cls, params: EncoderParams) -> "AdamWState":
        return cls(
            m=[np.zeros_like(t) for t in params.tensors()],
            v=[np.zeros_like(t) for t in params.tensors()],
        )


def lr_at(step: int, total_steps: int, lr: float, warmup_frac: float = 0.10) -> float:
    """Linear 0 -> lr over the first ceil(warmup_frac * total) steps, then
    cosine decay to 0 at total_steps."""
    if not 0 <= step <= total_steps:
        raise RBEError(f"step {step} outside [0, {total_steps}]")
    warmup = max(1, math.ceil(warmup_frac * total_steps))
    if step < warmup:
        return lr * step / warmup
    progress = (step - warmup) / max(1, total_steps - warmup)
    return lr * 0.5 * (1.0 + math.cos(math.pi * progress))


def adamw_step(params: EncoderParams, grads: Grads, state: AdamWState,
               lr: float, cfg: AdamWConfig) -> None:
    """In-place parameter update; Adam step first, then decoupled decay."""
    state.step += 1
    t = state.step
    bc1 = 1.0 - cfg.beta1 ** t
    bc2 = 1.0 - cfg.beta2 ** t
    for p, g, m, v in zip(params.tensors(), grads.tensors(), state.m, state.v):
        m *= cfg.beta1
        m += (1.0 - cfg.beta1) * g
        v *= cfg.beta2
        v += (1.0 - cfg.beta2) * g * g
        update = lr * (m / bc1) / (np.sqrt(v / bc2) + cfg.eps)
        p -= update
        if cfg.weight_decay:
            p -= lr * cfg.weight_decay * p
        if not np.all(np.isfinite(p)):
            raise RBEError(f"non-finite parameter after optimizer step {t}")
