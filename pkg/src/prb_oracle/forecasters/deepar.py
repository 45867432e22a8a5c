"""DeepAR-style estimator: stacked LSTM with a Gaussian head.

Training runs teacher-forced over context + horizon and sums the Gaussian
negative log-likelihood over the prediction range; forecasting draws
independent ancestral roll-outs where each sampled value feeds the next
step's input.
"""

from __future__ import annotations

import numpy as np

from .. import nncore as nn
from ..likelihoods import gaussian_nll_graph, softplus
from ..nncore import ParameterSet

N_FEATURES = 3  # previous value, hour-of-day, day-of-week


def build(config) -> ParameterSet:
    params = ParameterSet(seed=[config.seed, 0])
    for layer in range(config.rnn_layers):
        n_in = N_FEATURES if layer == 0 else config.rnn_cells
        params.weight(f"wx{layer}", n_in, 4 * config.rnn_cells)
        params.weight(f"wh{layer}", config.rnn_cells, 4 * config.rnn_cells)
        params.bias(f"bg{layer}", 4 * config.rnn_cells)
    params.weight("w_head", config.rnn_cells, 2)
    params.bias("b_head", 2)
    return params


def lstm_cell(params: ParameterSet, layer: int, x: nn.Tensor, h: nn.Tensor, c: nn.Tensor):
    """One LSTM step; gate layout [input, forget, cell, output]."""
    n = h.shape[1]
    gates = nn.add(
        nn.add(nn.matmul(x, params[f"wx{layer}"]), nn.matmul(h, params[f"wh{layer}"])),
        params[f"bg{layer}"],
    )
    i = nn.sigmoid(nn.narrow(gates, 1, 0, n))
    f = nn.sigmoid(nn.narrow(gates, 1, n, n))
    g = nn.tanh(nn.narrow(gates, 1, 2 * n, n))
    o = nn.sigmoid(nn.narrow(gates, 1, 3 * n, n))
    c_new = nn.add(nn.mul(f, c), nn.mul(i, g))
    h_new = nn.mul(o, nn.tanh(c_new))
    return h_new, c_new


def _zero_state(config):
    return [
        (nn.constant(np.zeros((1, config.rnn_cells))), nn.constant(np.zeros((1, config.rnn_cells))))
        for _ in range(config.rnn_layers)
    ]


def _step(params, config, x: nn.Tensor, state):
    """Advance all layers one step; returns (top h, new state)."""
    new_state = []
    inp = x
    for layer in range(config.rnn_layers):
        h, c = lstm_cell(params, layer, inp, *state[layer])
        new_state.append((h, c))
        inp = h
    return inp, new_state


def _input_at(value: float, cov_row: np.ndarray) -> nn.Tensor:
    return nn.constant(np.array([[value, cov_row[0], cov_row[1]]]))


def loss(params, config, ctx_scaled, tgt_scaled, feats) -> nn.Tensor:
    values = np.concatenate([ctx_scaled, tgt_scaled])
    cov = np.vstack([feats["ctx"], feats["tgt"]])
    state = _zero_state(config)
    head_rows = []
    total = config.context_len + config.horizon
    for t in range(1, total):
        top, state = _step(params, config, _input_at(values[t - 1], cov[t]), state)
        if t >= config.context_len:
            head_rows.append(top)
    hidden = nn.concat(head_rows, axis=0)
    raw = nn.add(nn.matmul(hidden, params["w_head"]), params["b_head"])
    return gaussian_nll_graph(
        nn.narrow(raw, 1, 0, 1), nn.narrow(raw, 1, 1, 1), tgt_scaled
    )


def paths(params, config, ctx_scaled, feats, rng) -> np.ndarray:
    cov_ctx, cov_tgt = feats["ctx"], feats["tgt"]
    # Warm the recurrent state on the observed context once; every sample
    # path then rolls forward from a copy of it.
    warm = _zero_state(config)
    for t in range(1, config.context_len):
        _, warm = _step(params, config, _input_at(ctx_scaled[t - 1], cov_ctx[t]), warm)
    warm_data = [(h.data.copy(), c.data.copy()) for h, c in warm]

    out = np.empty((config.num_samples, config.horizon))
    for s in range(config.num_samples):
        state = [(nn.constant(h), nn.constant(c)) for h, c in warm_data]
        prev = float(ctx_scaled[-1])
        for t in range(config.horizon):
            cov_row = cov_tgt[t]
            top, state = _step(params, config, _input_at(prev, cov_row), state)
            raw = nn.add(nn.matmul(top, params["w_head"]), params["b_head"]).data[0]
            mu, sigma = raw[0], float(softplus(raw[1]))
            prev = mu + sigma * rng.standard_normal()
            out[s, t] = prev
    return out
