"""Minimal dense-tensor graph with reverse-mode autodiff and Adam."""

from .adam import AdamState, adam_step
from .params import ParameterSet, init_params, load_checkpoint, save_checkpoint
from .tensor import (
    ShapeMismatch,
    Tensor,
    add,
    add_const,
    attention,
    backward,
    broadcast_rows,
    causal_mask,
    concat,
    constant,
    div,
    exp,
    layer_norm,
    log,
    matmul,
    mean_all,
    mul,
    narrow,
    no_grad,
    relu,
    reshape,
    scale,
    sigmoid,
    softmax,
    softplus,
    sqrt,
    square,
    sub,
    sum_all,
    tanh,
    transpose,
)

__all__ = [
    "AdamState",
    "ParameterSet",
    "ShapeMismatch",
    "Tensor",
    "adam_step",
    "add",
    "add_const",
    "attention",
    "backward",
    "broadcast_rows",
    "causal_mask",
    "concat",
    "constant",
    "div",
    "exp",
    "init_params",
    "layer_norm",
    "load_checkpoint",
    "log",
    "matmul",
    "mean_all",
    "mul",
    "narrow",
    "no_grad",
    "relu",
    "reshape",
    "save_checkpoint",
    "scale",
    "sigmoid",
    "softmax",
    "softplus",
    "sqrt",
    "square",
    "sub",
    "sum_all",
    "tanh",
    "transpose",
]
