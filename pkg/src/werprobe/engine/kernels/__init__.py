"""Kernel backend selection.

Convolutions are fastest through numpy's im2col + BLAS path on every shape
we care about, so they always ride numpy. Max pooling is the opposite: the
compiled extension's fused scan beats the stride-trick fallback by an order
of magnitude, so it is preferred when importable. Setting the environment
variable ``WERPROBE_NO_EXT`` (to any non-empty value) forces the pure numpy
fallback for everything. Both backends expose the same functions with the
same semantics; only speed differs. ``benchmarks/bench_kernels.py`` measures
the difference.
"""

import os

from werprobe.engine.kernels import numpy_backend

if os.environ.get("WERPROBE_NO_EXT"):
    _pool_impl = numpy_backend
else:
    try:
        from werprobe.engine.kernels import _ckernels as _pool_impl  # type: ignore[no-redef]
    except ImportError:
        _pool_impl = numpy_backend

BACKEND = _pool_impl.NAME

conv1d_forward = numpy_backend.conv1d_forward
conv1d_backward_input = numpy_backend.conv1d_backward_input
conv1d_backward_kernels = numpy_backend.conv1d_backward_kernels
maxpool1d_forward = _pool_impl.maxpool1d_forward
maxpool1d_backward = _pool_impl.maxpool1d_backward


def backend_name() -> str:
    """Name of the pooling backend selected at import time."""
    return BACKEND
