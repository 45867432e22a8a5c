"""Simple feed-forward estimator: context window in, per-step Student-t out.

One pass maps the scaled conditioning window through two hidden layers to
horizon x 3 raw outputs, laid out as [all mu | all sigma | all nu].
"""

from __future__ import annotations

import numpy as np

from .. import nncore as nn
from ..likelihoods import StudentTParams, project_studentt, sample, studentt_nll_graph
from ..nncore import ParameterSet

NU_FLOOR = 2.0


def build(config) -> ParameterSet:
    params = ParameterSet(seed=[config.seed, 0])
    sizes = [config.context_len, *config.hidden, 3 * config.horizon]
    for i, (n_in, n_out) in enumerate(zip(sizes[:-1], sizes[1:])):
        params.weight(f"w{i}", n_in, n_out)
        params.bias(f"b{i}", n_out)
    return params


def _forward(params: ParameterSet, config, ctx_scaled: np.ndarray):
    """Raw head outputs as three (horizon, 1) columns."""
    h = nn.constant(ctx_scaled.reshape(1, -1))
    n_layers = len(config.hidden) + 1
    for i in range(n_layers):
        h = nn.add(nn.matmul(h, params[f"w{i}"]), params[f"b{i}"])
        if i < n_layers - 1:
            h = nn.relu(h)
    hor = config.horizon
    raw_mu = nn.transpose(nn.narrow(h, 1, 0, hor))
    raw_sigma = nn.transpose(nn.narrow(h, 1, hor, hor))
    raw_nu = nn.transpose(nn.narrow(h, 1, 2 * hor, hor))
    return raw_mu, raw_sigma, raw_nu


def loss(params, config, ctx_scaled, tgt_scaled, feats) -> nn.Tensor:
    raw_mu, raw_sigma, raw_nu = _forward(params, config, ctx_scaled)
    return studentt_nll_graph(raw_mu, raw_sigma, raw_nu, tgt_scaled, nu_floor=NU_FLOOR)


def step_params(params, config, ctx_scaled) -> list[StudentTParams]:
    """Projected per-step distributions in scaled units."""
    raw_mu, raw_sigma, raw_nu = _forward(params, config, ctx_scaled)
    raws = np.hstack([raw_mu.data, raw_sigma.data, raw_nu.data])
    return [project_studentt(raws[t], nu_floor=NU_FLOOR) for t in range(config.horizon)]


def paths(params, config, ctx_scaled, feats, rng) -> np.ndarray:
    """num_samples independent draws per step from the projected Student-t."""
    dists = step_params(params, config, ctx_scaled)
    out = np.empty((config.num_samples, config.horizon))
    for t, dist in enumerate(dists):
        out[:, t] = sample(dist, rng, config.num_samples)
    return out
