"""Causal self-attention, multi-head blocks, and sampled generation.

Conventions: token embeddings are rows of X (n tokens by d features). The
causal mask is additive, applied before the row-wise softmax, and uses the
most negative finite float64 instead of -inf so no NaN can appear from
inf - inf; after max-subtraction those entries underflow to exactly zero,
which makes the "no attention to the future" property exact, not approximate.

No positional encodings anywhere: order sensitivity comes only from the causal
mask. This is a documented limitation of the toy stack.
"""

import json
import math
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from . import numkit
from .activations import sigmoid, softmax, softmax_temperature

MASK_VALUE = -sys.float_info.max

LN_EPS = 1e-5

FFN_WIDTH_FACTOR = 4


@dataclass
class AttentionHeadParams:
    WQ: np.ndarray  # d x d_k
    WK: np.ndarray  # d x d_k
    WV: np.ndarray  # d x d_v

    def validate(self) -> None:
        if self.WQ.shape != self.WK.shape:
            raise ValueError("WQ and WK must share a shape")
        if self.WV.shape[0] != self.WQ.shape[0]:
            raise ValueError("WV input dimension differs from WQ/WK")


@dataclass
class BlockParams:
    heads: list
    WO: np.ndarray        # (h * d_v) x d
    ln1_gain: np.ndarray  # d
    ln1_bias: np.ndarray
    ln2_gain: np.ndarray
    ln2_bias: np.ndarray
    W_a: np.ndarray       # d x d_ff
    b_a: np.ndarray       # d_ff
    W_b: np.ndarray       # d_ff x d
    b_b: np.ndarray       # d
    ln_eps: float = field(default=LN_EPS)

    def validate(self) -> None:
        if not self.heads:
            raise ValueError("need at least one head")
        d = self.heads[0].WQ.shape[0]
        d_v = self.heads[0].WV.shape[1]
        for head in self.heads:
            head.validate()
            if head.WQ.shape[0] != d or head.WV.shape[1] != d_v:
                raise ValueError("heads disagree on dimensions")
        if self.WO.shape != (len(self.heads) * d_v, d):
            raise ValueError("WO shape inconsistent with heads")
        for vec in (self.ln1_gain, self.ln1_bias, self.ln2_gain, self.ln2_bias):
            if vec.shape != (d,):
                raise ValueError("layer-norm parameter dimension mismatch")
        d_ff = self.W_a.shape[1]
        if self.W_a.shape != (d, d_ff) or self.b_a.shape != (d_ff,):
            raise ValueError("FFN first layer shape mismatch")
        if self.W_b.shape != (d_ff, d) or self.b_b.shape != (d,):
            raise ValueError("FFN second layer shape mismatch")


def qkv_project(x: np.ndarray, head: AttentionHeadParams):
    """(Q, K, V) = (X WQ, X WK, X WV)."""
    head.validate()
    if x.ndim != 2 or x.shape[1] != head.WQ.shape[0]:
        raise ValueError("input feature dimension does not match projections")
    q = numkit.matmul(x, head.WQ)
    k = numkit.matmul(x, head.WK)
    v = numkit.matmul(x, head.WV)
    return q, k, v


def attention_weights(q: np.ndarray, k: np.ndarray, causal: bool) -> np.ndarray:
    """Row-wise softmax of Q K^T / sqrt(d_k), with the additive causal mask."""
    if q.ndim != 2 or k.ndim != 2 or q.shape[1] != k.shape[1]:
        raise ValueError("Q and K must be 2-D with equal key dimension")
    d_k = q.shape[1]
    if d_k == 0:
        raise ValueError("key dimension must be >= 1")
    scores = numkit.matmul(q, k.T) / math.sqrt(d_k)
    n_q, n_k = scores.shape
    if causal:
        if n_q != n_k:
            raise ValueError("causal masking needs square scores")
        mask = np.zeros_like(scores)
        mask[np.triu_indices(n_q, 1)] = MASK_VALUE
        scores = scores + mask
    out = np.empty_like(scores)
    for i in range(n_q):
        out[i] = softmax(scores[i])
    return out


def attention_output(a: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Y = A V: each output row is a weighted sum of value rows."""
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("attention matrix must be square")
    if v.ndim != 2 or v.shape[0] != a.shape[1]:
        raise ValueError("value row count must match attention size")
    return numkit.matmul(a, v)


def single_head(x: np.ndarray, head: AttentionHeadParams, causal: bool) -> np.ndarray:
    q, k, v = qkv_project(x, head)
    return attention_output(attention_weights(q, k, causal), v)


def multi_head(x: np.ndarray, params: BlockParams, causal: bool) -> np.ndarray:
    """Concat of per-head outputs along features, projected by WO."""
    params.validate()
    outputs = [single_head(x, head, causal) for head in params.heads]
    concat = np.concatenate(outputs, axis=1)
    return numkit.matmul(concat, params.WO)


def layer_norm(z: np.ndarray, gain: np.ndarray, bias: np.ndarray,
               eps: float = LN_EPS) -> np.ndarray:
    """Per row: (z - mean) / sqrt(var + eps) * gain + bias."""
    if z.ndim != 2:
        raise ValueError("layer_norm expects a 2-D matrix")
    d = z.shape[1]
    if gain.shape != (d,) or bias.shape != (d,):
        raise ValueError("gain/bias dimension mismatch")
    out = np.empty_like(z)
    from . import _kernels
    for i in range(z.shape[0]):
        row = z[i]
        mean = _kernels.reduce_seq(row) / d
        centered = row - mean
        var = _kernels.reduce_seq(centered * centered) / d
        out[i] = centered / math.sqrt(var + eps) * gain + bias
    return out


def ffn(z: np.ndarray, params: BlockParams) -> np.ndarray:
    """Position-wise two-layer map, sigmoid activation between layers."""
    hidden = sigmoid(numkit.matmul(z, params.W_a) + params.b_a)
    return numkit.matmul(hidden, params.W_b) + params.b_b


def transformer_block(z: np.ndarray, params: BlockParams, causal: bool) -> np.ndarray:
    """LayerNorm(z + MultiHead(z)), then LayerNorm(that + FFN(that))."""
    params.validate()
    mixed = layer_norm(
        z + multi_head(z, params, causal),
        params.ln1_gain, params.ln1_bias, params.ln_eps,
    )
    return layer_norm(
        mixed + ffn(mixed, params),
        params.ln2_gain, params.ln2_bias, params.ln_eps,
    )


def init_block_params(rng: np.random.Generator, d: int, h: int,
                      d_ff=None) -> BlockParams:
    """Seeded uniform(-0.5, 0.5) weights; d must split evenly across heads."""
    if d < 1 or h < 1:
        raise ValueError("d and h must be >= 1")
    if d % h != 0:
        raise ValueError(f"head count {h} must divide model dimension {d}")
    if d_ff is None:
        d_ff = FFN_WIDTH_FACTOR * d
    d_k = d // h
    heads = [
        AttentionHeadParams(
            WQ=rng.uniform(-0.5, 0.5, size=(d, d_k)),
            WK=rng.uniform(-0.5, 0.5, size=(d, d_k)),
            WV=rng.uniform(-0.5, 0.5, size=(d, d_k)),
        )
        for _ in range(h)
    ]
    return BlockParams(
        heads=heads,
        WO=rng.uniform(-0.5, 0.5, size=(h * d_k, d)),
        ln1_gain=np.ones(d), ln1_bias=np.zeros(d),
        ln2_gain=np.ones(d), ln2_bias=np.zeros(d),
        W_a=rng.uniform(-0.5, 0.5, size=(d, d_ff)),
        b_a=rng.uniform(-0.5, 0.5, size=d_ff),
        W_b=rng.uniform(-0.5, 0.5, size=(d_ff, d)),
        b_b=rng.uniform(-0.5, 0.5, size=d),
    )


# ---------------------------------------------------------------------------
# sampling + generation


def sample_index(probs: np.ndarray, rng: np.random.Generator) -> int:
    """Cumulative-distribution inversion; ties resolve to the lowest index."""
    p = np.asarray(probs, dtype=np.float64)
    if p.ndim != 1 or p.shape[0] < 1:
        raise ValueError("sample_index expects a nonempty probability vector")
    cdf = np.cumsum(p)
    u = rng.random()
    idx = int(np.searchsorted(cdf, u, side="right"))
    return min(idx, p.shape[0] - 1)


def generate(blocks: list, e_in: np.ndarray, e_out: np.ndarray,
             prompt, temperature: float, steps: int,
             rng: np.random.Generator) -> list:
    """Autoregressive sampling: embed, run causal blocks, read logits off the
    last row against output embeddings, sample with temperature, append."""
    if not (temperature > 0.0):
        raise ValueError("temperature must be > 0")
    if steps < 0:
        raise ValueError("steps must be >= 0")
    ids = [int(t) for t in prompt]
    if not ids:
        raise ValueError("prompt must be non-empty")
    vocab = e_in.shape[0]
    if e_out.shape != e_in.shape:
        raise ValueError("input/output embedding tables must agree in shape")
    for t in ids:
        if not (0 <= t < vocab):
            raise ValueError(f"prompt token {t} outside vocabulary of {vocab}")
    for _ in range(steps):
        x = e_in[np.asarray(ids)]
        for blk in blocks:
            x = transformer_block(x, blk, causal=True)
        h_last = x[-1]
        logits = numkit.matvec(e_out, h_last)
        probs = softmax_temperature(logits, temperature)
        ids.append(sample_index(probs, rng))
    return ids


# ---------------------------------------------------------------------------
# persistence: a directory of CSV matrices plus a JSON manifest


def save_blocks(dirpath: str, blocks: list, e_in: np.ndarray,
                e_out: np.ndarray, seed=None) -> None:
    os.makedirs(dirpath, exist_ok=True)
    if not blocks:
        raise ValueError("no blocks to save")
    d = blocks[0].heads[0].WQ.shape[0]
    h = len(blocks[0].heads)
    d_ff = blocks[0].W_a.shape[1]
    files = {"E_in": "E_in.csv", "E_out": "E_out.csv"}
    numkit.save_matrix_csv(os.path.join(dirpath, files["E_in"]), e_in)
    numkit.save_matrix_csv(os.path.join(dirpath, files["E_out"]), e_out)
    for li, blk in enumerate(blocks):
        blk.validate()
        parts = {}
        for hi, head in enumerate(blk.heads):
            parts[f"head{hi}_WQ"] = head.WQ
            parts[f"head{hi}_WK"] = head.WK
            parts[f"head{hi}_WV"] = head.WV
        parts["WO"] = blk.WO
        parts["ln1_gain"] = blk.ln1_gain.reshape(1, -1)
        parts["ln1_bias"] = blk.ln1_bias.reshape(1, -1)
        parts["ln2_gain"] = blk.ln2_gain.reshape(1, -1)
        parts["ln2_bias"] = blk.ln2_bias.reshape(1, -1)
        parts["W_a"] = blk.W_a
        parts["b_a"] = blk.b_a.reshape(1, -1)
        parts["W_b"] = blk.W_b
        parts["b_b"] = blk.b_b.reshape(1, -1)
        for name, mat in parts.items():
            fname = f"block{li}_{name}.csv"
            files[f"block{li}_{name}"] = fname
            numkit.save_matrix_csv(os.path.join(dirpath, fname), mat)
    manifest = {
        "d": d, "h": h, "d_ff": d_ff, "layers": len(blocks),
        "ln_eps": blocks[0].ln_eps, "vocab": int(e_in.shape[0]),
        "seed": seed, "files": files,
    }
    with open(os.path.join(dirpath, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_blocks(dirpath: str):
    """Returns (blocks, E_in, E_out, manifest)."""
    with open(os.path.join(dirpath, "manifest.json")) as fh:
        manifest = json.load(fh)
    files = manifest["files"]

    def mat(key):
        return numkit.load_matrix_csv(os.path.join(dirpath, files[key]))

    e_in = mat("E_in")
    e_out = mat("E_out")
    blocks = []
    for li in range(manifest["layers"]):
        heads = [
            AttentionHeadParams(
                WQ=mat(f"block{li}_head{hi}_WQ"),
                WK=mat(f"block{li}_head{hi}_WK"),
                WV=mat(f"block{li}_head{hi}_WV"),
            )
            for hi in range(manifest["h"])
        ]
        blk = BlockParams(
            heads=heads,
            WO=mat(f"block{li}_WO"),
            ln1_gain=mat(f"block{li}_ln1_gain")[0],
            ln1_bias=mat(f"block{li}_ln1_bias")[0],
            ln2_gain=mat(f"block{li}_ln2_gain")[0],
            ln2_bias=mat(f"block{li}_ln2_bias")[0],
            W_a=mat(f"block{li}_W_a"),
            b_a=mat(f"block{li}_b_a")[0],
            W_b=mat(f"block{li}_W_b"),
            b_b=mat(f"block{li}_b_b")[0],
            ln_eps=manifest.get("ln_eps", LN_EPS),
        )
        blk.validate()
        blocks.append(blk)
    return blocks, e_in, e_out, manifest
