"""Deterministic LSTM baseline: one recurrent layer over the context, then an
affine head emitting all horizon values at once, trained on squared error."""

from __future__ import annotations

import numpy as np

from .. import nncore as nn
from ..nncore import ParameterSet
from .deepar import lstm_cell


def build(config) -> ParameterSet:
    params = ParameterSet(seed=[config.seed, 0])
    params.weight("wx0", 1, 4 * config.rnn_cells)
    params.weight("wh0", config.rnn_cells, 4 * config.rnn_cells)
    params.bias("bg0", 4 * config.rnn_cells)
    params.weight("w_head", config.rnn_cells, config.horizon)
    params.bias("b_head", config.horizon)
    return params


def _forward(params, config, ctx_scaled: np.ndarray) -> nn.Tensor:
    h = nn.constant(np.zeros((1, config.rnn_cells)))
    c = nn.constant(np.zeros((1, config.rnn_cells)))
    for t in range(config.context_len):
        h, c = lstm_cell(params, 0, nn.constant(np.array([[ctx_scaled[t]]])), h, c)
    return nn.add(nn.matmul(h, params["w_head"]), params["b_head"])


def loss(params, config, ctx_scaled, tgt_scaled, feats) -> nn.Tensor:
    pred = _forward(params, config, ctx_scaled)
    diff = nn.sub(pred, nn.constant(tgt_scaled.reshape(1, -1)))
    return nn.mean_all(nn.square(diff))


def paths(params, config, ctx_scaled, feats, rng) -> np.ndarray:
    return _forward(params, config, ctx_scaled).data.copy()
