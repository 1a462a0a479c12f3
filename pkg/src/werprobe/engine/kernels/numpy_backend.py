"""Pure numpy implementations of the hot kernels.

Used as the fallback when the compiled extension is unavailable (or when
``WERPROBE_NO_EXT`` is set). Convolutions are lowered to a single matrix
multiply over an im2col buffer so BLAS does the heavy lifting.
"""

import numpy as np

NAME = "numpy"


def _windows(x: np.ndarray, width: int, stride: int) -> np.ndarray:
    """Strided view of shape (n, c, n_windows, width) over the last axis."""
    view = np.lib.stride_tricks.sliding_window_view(x, width, axis=2)
    return view[:, :, ::stride, :]


def conv1d_forward(x: np.ndarray, kernels: np.ndarray, stride: int) -> np.ndarray:
    """Cross-correlate (n, c_in, length) with (c_out, c_in, width) kernels."""
    n, c_in, _ = x.shape
    c_out, _, width = kernels.shape
    win = _windows(x, width, stride)
    n_out = win.shape[2]
    cols = np.ascontiguousarray(win.transpose(0, 2, 1, 3)).reshape(n * n_out, c_in * width)
    out = cols @ kernels.reshape(c_out, c_in * width).T
    return np.ascontiguousarray(out.reshape(n, n_out, c_out).transpose(0, 2, 1))


def conv1d_backward_input(gy: np.ndarray, kernels: np.ndarray, stride: int, length: int) -> np.ndarray:
    n, _, n_out = gy.shape
    _, c_in, width = kernels.shape
    gx = np.zeros((n, c_in, length), dtype=gy.dtype)
    # One tap at a time: every output position t touches input position t*stride+j.
    span = (n_out - 1) * stride + 1
    for j in range(width):
        contrib = np.tensordot(gy, kernels[:, :, j], axes=([1], [0]))  # (n, n_out, c_in)
        gx[:, :, j : j + span : stride] += contrib.transpose(0, 2, 1)
    return gx


def conv1d_backward_kernels(gy: np.ndarray, x: np.ndarray, stride: int, width: int) -> np.ndarray:
    n, c_in, _ = x.shape
    _, c_out, n_out = gy.shape[0], gy.shape[1], gy.shape[2]
    win = _windows(x, width, stride)
    cols = np.ascontiguousarray(win.transpose(0, 2, 1, 3)).reshape(n * n_out, c_in * width)
    g = np.ascontiguousarray(gy.transpose(0, 2, 1)).reshape(n * n_out, c_out)
    return (g.T @ cols).reshape(c_out, c_in, width)


def maxpool1d_forward(x: np.ndarray, width: int, stride: int):
    """Windowed max over the last axis; returns (values, absolute argmax).

    np.argmax picks the first maximum, which realizes the lowest-index
    tie-breaking rule.
    """
    win = _windows(x, width, stride)
    n_out = win.shape[2]
    arg = win.argmax(axis=3)
    idx = arg + (np.arange(n_out, dtype=np.int64) * stride)
    return win.max(axis=3), idx.astype(np.int64)


def maxpool1d_backward(gy: np.ndarray, idx: np.ndarray, length: int) -> np.ndarray:
    n, c, n_out = gy.shape
    gx = np.zeros((n * c, length), dtype=gy.dtype)
    rows = np.repeat(np.arange(n * c), n_out)
    np.add.at(gx, (rows, idx.reshape(-1)), gy.reshape(-1))
    return gx.reshape(n, c, length)
