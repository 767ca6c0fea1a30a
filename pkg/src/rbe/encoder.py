"""Compact trainable text encoder and the contrastive objective.

The encoder is a hashed-vocabulary embedding table, mean pooling over all
token positions (markers included), and a single tanh projection:

    out = tanh(W . mean(emb[tokens]) + b)

Similarity between the two encoder outputs is cosine; the training loss is
the margin-based contrastive loss on D = 1 - cosine.  Gradients are exact
and analytic; only embedding rows touched by a batch receive gradient.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import RBEError, ValidationError
from .textutil import words

VOCAB_BUCKETS = 1 << 16
CLS_ID = 0
SEP_ID = 1
N_RESERVED = 2

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK64 = (1 << 64) - 1


def hash_token(token: str, buckets: int = VOCAB_BUCKETS) -> int:
    """FNV-1a 64-bit over UTF-8 bytes, folded into a bucket id past the markers."""
    h = _FNV_OFFSET
    for byte in token.encode("utf-8"):
        h = ((h ^ byte) * _FNV_PRIME) & _MASK64
    return h % buckets + N_RESERVED


def tokenize(text: str, buckets: int = VOCAB_BUCKETS) -> list[int]:
    """Hashed token ids; empty text collapses to a lone [SEP]."""
    ids = [hash_token(w, buckets) for w in words(text)]
    return ids if ids else [SEP_ID]


@dataclass
class EncoderParams:
    emb: np.ndarray     # (V, d)
    proj_w: np.ndarray  # (d, d)
    proj_b: np.ndarray  # (d,)

    @property
    def dim(self) -> int:
        return self.emb.shape[1]

    @property
    def vocab(self) -> int:
        return self.emb.shape[0]

    @classmethod
    def init(cls, seed: int, dim: int = 64,
             vocab: int = VOCAB_BUCKETS + N_RESERVED) -> "EncoderParams":
        if dim < 2:
            raise ValidationError("embedding dim must be >= 2")
        rng = np.random.default_rng(seed)
        return cls(
            emb=rng.uniform(-0.05, 0.05, size=(vocab, dim)),
            proj_w=rng.uniform(-0.05, 0.05, size=(dim, dim)),
            proj_b=rng.uniform(-0.05, 0.05, size=(dim,)),
        )

    def copy(self) -> "EncoderParams":
        return EncoderParams(self.emb.copy(), self.proj_w.copy(), self.proj_b.copy())

    def tensors(self) -> list[np.ndarray]:
        return [self.emb, self.proj_w, self.proj_b]

    def digest(self) -> str:
        h = hashlib.sha256()
        for t in self.tensors():
            h.update(np.ascontiguousarray(t, dtype="<f4").tobytes())
        return h.hexdigest()


@dataclass
class Grads:
    emb: np.ndarray
    proj_w: np.ndarray
    proj_b: np.ndarray

    @classmethod
    def zeros_like(cls, p: EncoderParams) -> "Grads":
        return cls(np.zeros_like(p.emb), np.zeros_like(p.proj_w),
                   np.zeros_like(p.proj_b))

    def tensors(self) -> list[np.ndarray]:
        return [self.emb, self.proj_w, self.proj_b]


def encode(params: EncoderParams, tokens: Sequence[int]) -> np.ndarray:
    if len(tokens) == 0:
        raise ValidationError("cannot encode an empty token sequence")
    h = params.emb[list(tokens)].mean(axis=0)
    return np.tanh(params.proj_w @ h + params.proj_b)


def cosine_sim(u: np.ndarray, v: np.ndarray) -> float:
    nu = float(np.linalg.norm(u))
    nv = float(np.linalg.norm(v))
    if nu == 0.0 or nv == 0.0:
        raise ValidationError("cosine similarity undefined for zero-norm input")
    return float(u @ v) / (nu * nv)


@dataclass
class LossConfig:
    margin: float = 0.5

    def __post_init__(self):
        if not 0.0 < self.margin <= 1.0:
            raise ValidationError("margin must lie in (0, 1]")


def contrastive_loss(distance: float, y: int, cfg: LossConfig) -> float:
    """0.5 * (y * D^2 + (1-y) * max(m - D, 0)^2) with D = 1 - cosine."""
    hinge = max(cfg.margin - distance, 0.0)
    return 0.5 * (y * distance * distance + (1 - y) * hinge * hinge)


def loss_and_grads(
    params_r: EncoderParams,
    params_t: EncoderParams,
    batch: Sequence[tuple[Sequence[int], Sequence[int], int]],
    cfg: LossConfig,
) -> tuple[float, Grads, Grads]:
    """Mean batch loss and exact gradients for both encoders.

    Each batch item is (rule_tokens, text_tokens, label).
    """
    if not batch:
        raise ValidationError("batch must be non-empty")
    grads_r = Grads.zeros_like(params_r)
    grads_t = Grads.zeros_like(params_t)
    total = 0.0
    scale = 1.0 / len(batch)
    for idx, (rule_tokens, text_tokens, y) in enumerate(batch):
        u = encode(params_r, rule_tokens)
        v = encode(params_t, text_tokens)
        sim = cosine_sim(u, v)
        dist = 1.0 - sim
        loss = contrastive_loss(dist, y, cfg)
        if not np.isfinite(loss):
            raise RBEError(f"non-finite loss at batch index {idx}")
        total += loss

        # dL/dD, then dD/dsim = -1
        hinge = max(cfg.margin - dist, 0.0)
        dl_dd = y * dist - (1 - y) * hinge
        dl_dsim = -dl_dd
        if dl_dsim == 0.0:
            continue
        nu = float(np.linalg.norm(u))
        nv = float(np.linalg.norm(v))
        du = dl_dsim * (v / (nu * nv) - sim * u / (nu * nu))
        dv = dl_dsim * (u / (nu * nv) - sim * v / (nv * nv))
        _backprop(params_r, grads_r, rule_tokens, u, du, scale)
        _backprop(params_t, grads_t, text_tokens, v, dv, scale)
    return total * scale, grads_r, grads_t


def _backprop(params: EncoderParams, grads: Grads, tokens: Sequence[int],
              out: np.ndarray, dout: np.ndarray, scale: float) -> None:
    dz = dout * (1.0 - out * out) * scale
    h = params.emb[list(tokens)].mean(axis=0)
    grads.proj_w += np.outer(dz, h)
    grads.proj_b += dz
    dh = params.proj_w.T @ dz / len(tokens)
    for t in tokens:
        grads.emb[t] += dh


# --------------------------------------------------------------------------
# Checkpoint IO: "RBE1" magic + little-endian f32 tensors, JSON sidecar.

_MAGIC = b"RBE1"


def save_checkpoint(path, params_r: EncoderParams, params_t: EncoderParams,
                    seed: int, step: int) -> None:
    path = str(path)
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        for p in (params_r, params_t):
            for t in p.tensors():
                fh.write(np.ascontiguousarray(t, dtype="<f4").tobytes())
    manifest = {
        "d": params_r.dim,
        "V": params_r.vocab,
        "seed": seed,
        "step": step,
    }
    with open(path + ".json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, sort_keys=True)
        fh.write("\n")


def load_checkpoint(path) -> tuple[EncoderParams, EncoderParams, dict]:
    path = str(path)
    with open(path + ".json", encoding="utf-8") as fh:
        manifest = json.load(fh)
    d, vocab = manifest["d"], manifest["V"]
    shapes = [(vocab, d), (d, d), (d,)]
    with open(path, "rb") as fh:
        if fh.read(4) != _MAGIC:
            raise ValidationError(f"{path}: not a checkpoint file (bad magic)")
        out = []
        for _ in range(2):
            tensors = []
            for shape in shapes:
                n = int(np.prod(shape))
                buf = fh.read(4 * n)
                if len(buf) != 4 * n:
                    raise ValidationError(f"{path}: truncated checkpoint")
                tensors.append(
                    np.frombuffer(buf, dtype="<f4").astype(np.float64).reshape(shape)
                )
            out.append(EncoderParams(*tensors))
        if fh.read(1):
            raise ValidationError(f"{path}: trailing bytes in checkpoint")
    return out[0], out[1], manifest
