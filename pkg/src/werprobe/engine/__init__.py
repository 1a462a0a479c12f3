"""Reverse-mode autodiff engine: tensors, ops, and optimizers."""

from werprobe.engine.ops import (
    concat,
    conv1d,
    cross_entropy,
    dense,
    dot_const,
    dropout,
    embedding,
    global_avg_pool,
    global_max_pool,
    mae_loss,
    maxpool1d,
    mean_over_batch,
    relu,
    softmax,
    swap_last_axes,
    tensor_sum,
)
from werprobe.engine.optim import Adadelta, Adam, adadelta_step, adam_step
from werprobe.engine.tensor import (
    Parameter,
    Tensor,
    backward,
    get_default_dtype,
    set_default_dtype,
    using_dtype,
)

__all__ = [
    "Adadelta",
    "Adam",
    "Parameter",
    "Tensor",
    "adadelta_step",
    "adam_step",
    "backward",
    "concat",
    "conv1d",
    "cross_entropy",
    "dense",
    "dot_const",
    "dropout",
    "embedding",
    "get_default_dtype",
    "global_avg_pool",
    "global_max_pool",
    "mae_loss",
    "maxpool1d",
    "mean_over_batch",
    "relu",
    "set_default_dtype",
    "softmax",
    "swap_last_axes",
    "tensor_sum",
    "using_dtype",
]
