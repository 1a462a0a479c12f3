"""Differentiable operations over :class:`~werprobe.engine.tensor.Tensor`.

Every op validates shapes up front, computes the forward value with numpy
(convolution and max pooling go through the kernel backend), and registers
a closure that routes gradients to its inputs. All ops accept either a
single sample or a batch with one extra leading axis.
"""

from __future__ import annotations

import numpy as np

from werprobe.engine import kernels
from werprobe.engine.tensor import Tensor
from werprobe.errors import (
    ConfigError,
    EmptyBatchError,
    LabelError,
    ShapeError,
    VocabularyError,
    WindowError,
)

CE_FLOOR = 1e-12


def _batched3(x: np.ndarray, what: str) -> tuple[np.ndarray, bool]:
    """Coerce (c, L) or (n, c, L) input to (n, c, L)."""
    if x.ndim == 2:
        return x[None, :, :], True
    if x.ndim == 3:
        return x, False
    raise ShapeError(f"{what}: expected rank 2 or 3 input, got shape {x.shape}")


def dense(x: Tensor, weight: Tensor, bias: Tensor) -> Tensor:
    """Affine map: y = x @ weight.T + bias, over a vector or a batch."""
    xd, wd, bd = x.data, weight.data, bias.data
    if wd.ndim != 2:
        raise ShapeError(f"dense: weight must be a matrix, got shape {wd.shape}")
    if bd.shape != (wd.shape[0],):
        raise ShapeError(f"dense: bias shape {bd.shape} does not match weight shape {wd.shape}")
    if xd.ndim not in (1, 2) or xd.shape[-1] != wd.shape[1]:
        raise ShapeError(f"dense: input shape {xd.shape} does not match weight shape {wd.shape}")

    out = Tensor(xd @ wd.T + bd, parents=(x, weight, bias), op="dense")

    def _bw(g: np.ndarray) -> None:
        x.accumulate(g @ wd)
        if xd.ndim == 1:
            weight.accumulate(np.outer(g, xd))
            bias.accumulate(g)
        else:
            weight.accumulate(g.T @ xd)
            bias.accumulate(g.sum(axis=0))

    out._backward = _bw
    return out


def conv1d(x: Tensor, kernel: Tensor, bias: Tensor, stride: int = 1) -> Tensor:
    """Valid (unpadded) cross-correlation along the last axis."""
    if stride < 1:
        raise ConfigError(f"conv1d: stride must be >= 1, got {stride}")
    kd, bd = kernel.data, bias.data
    if kd.ndim != 3:
        raise ShapeError(f"conv1d: kernel must have shape (c_out, c_in, k), got {kd.shape}")
    xd, single = _batched3(x.data, "conv1d")
    n, c_in, length = xd.shape
    c_out, kc_in, width = kd.shape
    if kc_in != c_in:
        raise ShapeError(f"conv1d: input shape {x.data.shape} does not match kernel shape {kd.shape}")
    if bd.shape != (c_out,):
        raise ShapeError(f"conv1d: bias shape {bd.shape} does not match kernel shape {kd.shape}")
    if width > length:
        raise WindowError(f"conv1d: kernel width {width} exceeds input length {length}")

    xc = np.ascontiguousarray(xd)
    kc = np.ascontiguousarray(kd)
    y = kernels.conv1d_forward(xc, kc, stride) + bd[:, None]
    out = Tensor(y[0] if single else y, parents=(x, kernel, bias), op="conv1d")

    def _bw(g: np.ndarray) -> None:
        g3 = np.ascontiguousarray(g[None] if single else g)
        gx = kernels.conv1d_backward_input(g3, kc, stride, length)
        x.accumulate(gx[0] if single else gx)
        kernel.accumulate(kernels.conv1d_backward_kernels(g3, xc, stride, width))
        bias.accumulate(g3.sum(axis=(0, 2)))

    out._backward = _bw
    return out


def relu(x: Tensor) -> Tensor:
    mask = x.data > 0
    # maximum (not where) so non-finite inputs propagate instead of
    # being silently clamped to zero
    out = Tensor(np.maximum(x.data, 0), parents=(x,), op="relu")

    def _bw(g: np.ndarray) -> None:
        x.accumulate(np.where(mask, g, 0))

    out._backward = _bw
    return out


def maxpool1d(x: Tensor, width: int, stride: int) -> Tensor:
    """Windowed max over the last axis; gradient goes to the first argmax."""
    if stride < 1 or width < 1:
        raise ConfigError(f"maxpool1d: width/stride must be >= 1, got {width}/{stride}")
    xd = x.data
    rank = xd.ndim
    if rank == 1:
        xd = xd[None, None, :]
    elif rank == 2:
        xd = xd[None, :, :]
    elif rank != 3:
        raise ShapeError(f"maxpool1d: expected rank 1-3 input, got shape {x.data.shape}")
    length = xd.shape[2]
    if width > length:
        raise WindowError(f"maxpool1d: window {width} exceeds input length {length}")

    xc = np.ascontiguousarray(xd)
    y, idx = kernels.maxpool1d_forward(xc, width, stride)
    data = y[0, 0] if rank == 1 else (y[0] if rank == 2 else y)
    out = Tensor(data, parents=(x,), op="maxpool1d")

    def _bw(g: np.ndarray) -> None:
        g3 = np.ascontiguousarray(g.reshape(y.shape))
        gx = kernels.maxpool1d_backward(g3, idx, length)
        x.accumulate(gx.reshape(x.data.shape))

    out._backward = _bw
    return out


def global_max_pool(x: Tensor) -> Tensor:
    """Max over the last axis (max-over-time); ties go to the lowest index."""
    xd = x.data
    if xd.ndim < 1 or xd.shape[-1] < 1:
        raise ShapeError(f"global_max_pool: nothing to pool in shape {xd.shape}")
    arg = xd.argmax(axis=-1)
    out = Tensor(np.take_along_axis(xd, arg[..., None], axis=-1)[..., 0], parents=(x,), op="gmax")

    def _bw(g: np.ndarray) -> None:
        gx = np.zeros_like(xd)
        np.put_along_axis(gx, arg[..., None], g[..., None], axis=-1)
        x.accumulate(gx)

    out._backward = _bw
    return out


def global_avg_pool(x: Tensor) -> Tensor:
    xd = x.data
    if xd.ndim < 1 or xd.shape[-1] < 1:
        raise ShapeError(f"global_avg_pool: nothing to pool in shape {xd.shape}")
    length = xd.shape[-1]
    out = Tensor(xd.mean(axis=-1), parents=(x,), op="gavg")

    def _bw(g: np.ndarray) -> None:
        x.accumulate(np.repeat(g[..., None], length, axis=-1) / length)

    out._backward = _bw
    return out


def softmax(x: Tensor) -> Tensor:
    """Stable softmax over the last axis; outputs are positive and sum to 1."""
    xd = x.data
    if xd.shape[-1] < 1:
        raise ShapeError(f"softmax: empty last axis in shape {xd.shape}")
    shifted = xd - xd.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    p = e / e.sum(axis=-1, keepdims=True)
    out = Tensor(p, parents=(x,), op="softmax")

    def _bw(g: np.ndarray) -> None:
        inner = (g * p).sum(axis=-1, keepdims=True)
        x.accumulate(p * (g - inner))

    out._backward = _bw
    return out


def cross_entropy(probabilities: Tensor, true_class) -> Tensor:
    """Negative log-likelihood of the true class, averaged over the batch.

    When ``probabilities`` comes straight from :func:`softmax`, the gradient
    is routed through the fused softmax+CE rule (p - onehot) with respect to
    the logits, bypassing the softmax node.
    """
    p = probabilities.data
    if p.ndim == 1:
        p2 = p[None, :]
        cls = np.asarray([true_class], dtype=np.int64)
    elif p.ndim == 2:
        p2 = p
        cls = np.asarray(true_class, dtype=np.int64).reshape(-1)
        if cls.shape[0] != p2.shape[0]:
            raise ShapeError(
                f"cross_entropy: {cls.shape[0]} labels for batch of {p2.shape[0]}"
            )
    else:
        raise ShapeError(f"cross_entropy: expected rank 1 or 2 probabilities, got {p.shape}")
    n, k = p2.shape
    if cls.min() < 0 or cls.max() >= k:
        raise LabelError(f"cross_entropy: class index out of range [0, {k})")

    picked = p2[np.arange(n), cls]
    value = float(-np.log(picked + CE_FLOOR).mean())

    fused = probabilities._op == "softmax"
    parent = probabilities._parents[0] if fused else probabilities
    out = Tensor(np.asarray(value, dtype=p.dtype), parents=(parent,), op="xent")

    def _bw(g: np.ndarray) -> None:
        scale = float(g) / n
        if fused:
            glogits = p2.copy()
            glogits[np.arange(n), cls] -= 1.0
            parent.accumulate((glogits * scale).reshape(parent.data.shape))
        else:
            gp = np.zeros_like(p2)
            gp[np.arange(n), cls] = -scale / (picked + CE_FLOOR)
            parent.accumulate(gp.reshape(parent.data.shape))

    out._backward = _bw
    return out


def mae_loss(predicted: Tensor, truth) -> Tensor:
    """Mean absolute deviation; the subgradient at zero difference is zero."""
    t = truth.data if isinstance(truth, Tensor) else np.asarray(truth, dtype=predicted.data.dtype)
    pd = predicted.data
    if pd.shape != t.shape:
        raise ShapeError(f"mae_loss: shapes {pd.shape} and {t.shape} differ")
    if pd.size == 0:
        raise EmptyBatchError("mae_loss: empty batch")
    diff = pd - t
    out = Tensor(np.asarray(np.abs(diff).mean(), dtype=pd.dtype), parents=(predicted,), op="mae")

    def _bw(g: np.ndarray) -> None:
        predicted.accumulate(float(g) * np.sign(diff) / diff.size)

    out._backward = _bw
    return out


def dropout(x: Tensor, rate: float, training: bool, rng: np.random.Generator | None = None) -> Tensor:
    """Inverted dropout: identity at inference, survivor scaling in training."""
    if not 0.0 <= rate < 1.0:
        raise ConfigError(f"dropout: rate must be in [0, 1), got {rate}")
    if not training or rate == 0.0:
        return x
    if rng is None:
        raise ConfigError("dropout: training mode needs an rng")
    keep = (rng.random(x.data.shape) >= rate).astype(x.data.dtype)
    scale = 1.0 / (1.0 - rate)
    out = Tensor(x.data * keep * scale, parents=(x,), op="dropout")

    def _bw(g: np.ndarray) -> None:
        x.accumulate(g * keep * scale)

    out._backward = _bw
    return out


def embedding(table: Tensor, ids, pad_index: int = 0) -> Tensor:
    """Row lookup into an embedding table; the pad row receives no gradient."""
    idx = np.asarray(ids, dtype=np.int64)
    vocab = table.data.shape[0]
    if idx.size and (idx.min() < 0 or idx.max() >= vocab):
        raise VocabularyError(f"embedding: token index out of range [0, {vocab})")
    out = Tensor(table.data[idx], parents=(table,), op="embedding")

    def _bw(g: np.ndarray) -> None:
        gt = np.zeros_like(table.data)
        np.add.at(gt, idx.reshape(-1), g.reshape(-1, table.data.shape[1]))
        if 0 <= pad_index < vocab:
            gt[pad_index] = 0.0
        table.accumulate(gt)

    out._backward = _bw
    return out


def concat(parts: list[Tensor], axis: int = -1) -> Tensor:
    if not parts:
        raise EmptyBatchError("concat: nothing to concatenate")
    datas = [p.data for p in parts]
    out = Tensor(np.concatenate(datas, axis=axis), parents=tuple(parts), op="concat")
    sizes = [d.shape[axis] for d in datas]

    def _bw(g: np.ndarray) -> None:
        offset = 0
        for part, size in zip(parts, sizes):
            sl = [slice(None)] * g.ndim
            sl[axis if axis >= 0 else g.ndim + axis] = slice(offset, offset + size)
            part.accumulate(g[tuple(sl)])
            offset += size

    out._backward = _bw
    return out


def swap_last_axes(x: Tensor) -> Tensor:
    """Exchange the last two axes (token-major <-> channel-major layouts)."""
    if x.data.ndim < 2:
        raise ShapeError(f"swap_last_axes: need rank >= 2, got shape {x.data.shape}")
    out = Tensor(np.ascontiguousarray(np.swapaxes(x.data, -1, -2)), parents=(x,), op="swap")

    def _bw(g: np.ndarray) -> None:
        x.accumulate(np.swapaxes(g, -1, -2))

    out._backward = _bw
    return out


def dot_const(x: Tensor, weights) -> Tensor:
    """Weighted sum over the last axis against a constant vector."""
    w = np.asarray(weights, dtype=x.data.dtype)
    if w.ndim != 1 or x.data.shape[-1] != w.shape[0]:
        raise ShapeError(f"dot_const: shapes {x.data.shape} and {w.shape} do not conform")
    out = Tensor(x.data @ w, parents=(x,), op="dot_const")

    def _bw(g: np.ndarray) -> None:
        x.accumulate(np.multiply.outer(g, w).reshape(x.data.shape))

    out._backward = _bw
    return out


def tensor_sum(x: Tensor) -> Tensor:
    out = Tensor(np.asarray(x.data.sum(), dtype=x.data.dtype), parents=(x,), op="sum")

    def _bw(g: np.ndarray) -> None:
        x.accumulate(np.full_like(x.data, float(g)))

    out._backward = _bw
    return out


def mean_over_batch(x: Tensor) -> Tensor:
    """Mean over the leading axis, used to reduce per-item scalars."""
    if x.data.ndim == 0:
        return x
    n = x.data.shape[0]
    if n == 0:
        raise EmptyBatchError("mean_over_batch: empty batch")
    out = Tensor(np.asarray(x.data.mean(axis=0), dtype=x.data.dtype), parents=(x,), op="bmean")

    def _bw(g: np.ndarray) -> None:
        x.accumulate(np.broadcast_to(g / n, x.data.shape).copy())

    out._backward = _bw
    return out
