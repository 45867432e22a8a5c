"""Transformer estimator: self-attention encoder, single-block decoder,
Student-t head.

The encoder ingests the embedded context; the decoder applies masked
self-attention, attention over the encoder output, and a position-wise
feed-forward layer. Training is teacher-forced; forecasting samples
autoregressively.
"""

from __future__ import annotations

import math

import numpy as np

from .. import nncore as nn
from ..likelihoods import project_studentt, sample, studentt_nll_graph
from ..nncore import ParameterSet

N_FEATURES = 3  # previous (encoder: current) value, hour-of-day, day-of-week
NU_FLOOR = 2.0


def build(config) -> ParameterSet:
    d = config.model_dim
    ff = config.ff_scale * d
    params = ParameterSet(seed=[config.seed, 0])
    for side in ("enc", "dec"):
        params.weight(f"{side}_embed", N_FEATURES, d)
        params.bias(f"{side}_embed_b", d)
    for i in range(config.blocks):
        _attention_params(params, f"enc{i}_attn", d)
        _ff_params(params, f"enc{i}", d, ff)
        _ln_params(params, f"enc{i}_ln1", d)
        _ln_params(params, f"enc{i}_ln2", d)
    _attention_params(params, "dec_self", d)
    _attention_params(params, "dec_cross", d)
    _ff_params(params, "dec", d, ff)
    for name in ("dec_ln1", "dec_ln2", "dec_ln3"):
        _ln_params(params, name, d)
    params.weight("head", d, 3)
    params.bias("head_b", 3)
    return params


def _attention_params(params, prefix, d):
    for proj in ("wq", "wk", "wv", "wo"):
        params.weight(f"{prefix}_{proj}", d, d)


def _ff_params(params, prefix, d, ff):
    params.weight(f"{prefix}_ff1", d, ff)
    params.bias(f"{prefix}_ff1_b", ff)
    params.weight(f"{prefix}_ff2", ff, d)
    params.bias(f"{prefix}_ff2_b", d)


def _ln_params(params, prefix, d):
    params.add(f"{prefix}_g", np.ones((1, d)))
    params.bias(f"{prefix}_b", d)


def positional_encoding(length: int, d: int) -> np.ndarray:
    """Sinusoidal position table, shape (length, d)."""
    pos = np.arange(length, dtype=np.float64)[:, None]
    i = np.arange(d, dtype=np.float64)[None, :]
    angle = pos / np.power(10000.0, 2.0 * np.floor(i / 2.0) / d)
    return np.where(i % 2 == 0, np.sin(angle), np.cos(angle))


def multi_head_attention(params, prefix, x_q, x_kv, heads, mask=None) -> nn.Tensor:
    d = x_q.shape[1]
    q = nn.matmul(x_q, params[f"{prefix}_wq"])
    k = nn.matmul(x_kv, params[f"{prefix}_wk"])
    v = nn.matmul(x_kv, params[f"{prefix}_wv"])
    head_dim = d // heads
    outs = [
        nn.attention(
            nn.narrow(q, 1, h * head_dim, head_dim),
            nn.narrow(k, 1, h * head_dim, head_dim),
            nn.narrow(v, 1, h * head_dim, head_dim),
            mask,
        )
        for h in range(heads)
    ]
    return nn.matmul(nn.concat(outs, axis=1), params[f"{prefix}_wo"])


def _feed_forward(params, prefix, x) -> nn.Tensor:
    inner = nn.relu(nn.add(nn.matmul(x, params[f"{prefix}_ff1"]), params[f"{prefix}_ff1_b"]))
    return nn.add(nn.matmul(inner, params[f"{prefix}_ff2"]), params[f"{prefix}_ff2_b"])


def _sublayer(params, ln_prefix, x, out) -> nn.Tensor:
    return nn.layer_norm(nn.add(x, out), params[f"{ln_prefix}_g"], params[f"{ln_prefix}_b"])


def encode(params, config, ctx_scaled: np.ndarray, cov_ctx: np.ndarray) -> nn.Tensor:
    inp = np.column_stack([ctx_scaled, cov_ctx])
    x = nn.add(nn.matmul(nn.constant(inp), params["enc_embed"]), params["enc_embed_b"])
    # sqrt(d) embedding gain keeps the value signal from drowning in the
    # positional table.
    x = nn.scale(x, math.sqrt(config.model_dim))
    x = nn.add(x, nn.constant(positional_encoding(config.context_len, config.model_dim)))
    for i in range(config.blocks):
        a = multi_head_attention(params, f"enc{i}_attn", x, x, config.heads)
        x = _sublayer(params, f"enc{i}_ln1", x, a)
        x = _sublayer(params, f"enc{i}_ln2", x, _feed_forward(params, f"enc{i}", x))
    return x


def decode(params, config, dec_inp: np.ndarray, first_pos: int, enc_out: nn.Tensor) -> nn.Tensor:
    """Decoder raw head outputs (len(dec_inp), 3); dec_inp rows are
    [previous value, hour, day-of-week]."""
    m = dec_inp.shape[0]
    table = positional_encoding(first_pos + m, config.model_dim)[first_pos:]
    y = nn.add(nn.matmul(nn.constant(dec_inp), params["dec_embed"]), params["dec_embed_b"])
    y = nn.scale(y, math.sqrt(config.model_dim))
    y = nn.add(y, nn.constant(table))
    a = multi_head_attention(params, "dec_self", y, y, config.heads, nn.causal_mask(m))
    y = _sublayer(params, "dec_ln1", y, a)
    a2 = multi_head_attention(params, "dec_cross", y, enc_out, config.heads)
    y = _sublayer(params, "dec_ln2", y, a2)
    y = _sublayer(params, "dec_ln3", y, _feed_forward(params, "dec", y))
    return nn.add(nn.matmul(y, params["head"]), params["head_b"])


def loss(params, config, ctx_scaled, tgt_scaled, feats) -> nn.Tensor:
    enc_out = encode(params, config, ctx_scaled, feats["ctx"])
    prev = np.concatenate([[ctx_scaled[-1]], tgt_scaled[:-1]])
    dec_inp = np.column_stack([prev, feats["tgt"]])
    raw = decode(params, config, dec_inp, config.context_len, enc_out)
    return studentt_nll_graph(
        nn.narrow(raw, 1, 0, 1),
        nn.narrow(raw, 1, 1, 1),
        nn.narrow(raw, 1, 2, 1),
        tgt_scaled,
        nu_floor=NU_FLOOR,
    )


def paths(params, config, ctx_scaled, feats, rng) -> np.ndarray:
    enc_out = encode(params, config, ctx_scaled, feats["ctx"])
    cov_tgt = feats["tgt"]
    out = np.empty((config.num_samples, config.horizon))
    for s in range(config.num_samples):
        prev = [float(ctx_scaled[-1])]
        for t in range(config.horizon):
            dec_inp = np.column_stack([prev, cov_tgt[: t + 1]])
            raw = decode(params, config, dec_inp, config.context_len, enc_out)
            dist = project_studentt(raw.data[-1], nu_floor=NU_FLOOR)
            value = float(sample(dist, rng, 1)[0])
            out[s, t] = value
            prev.append(value)
    return out
