"""Compare the compiled kernel backend against the numpy fallback.

Run as:

    python3 benchmarks/bench_kernels.py

Set WERPROBE_NO_EXT=1 to confirm the fallback path matches from the same
entry point. Shapes mirror the desk-scale encoders: text conv over 64
embedded tokens and the strided first stage over a 12000-sample signal.
"""

from __future__ import annotations

import time

import numpy as np

from werprobe.engine import kernels
from werprobe.engine.kernels import backend_name, numpy_backend

try:
    from werprobe.engine.kernels import _ckernels
except ImportError:
    _ckernels = None


def _time(fn, *args, repeats: int = 20) -> float:
    fn(*args)  # warm up
    t0 = time.perf_counter()
    for _ in range(repeats):
        fn(*args)
    return (time.perf_counter() - t0) / repeats


def _bench_case(name, shape_x, shape_k, stride):
    """Compiled loop nest vs im2col+BLAS; BLAS wins, which is why convs ride numpy."""
    rng = np.random.default_rng(0)
    x = rng.normal(size=shape_x).astype(np.float32)
    k = rng.normal(size=shape_k).astype(np.float32)
    compiled = _ckernels if _ckernels is not None else numpy_backend
    tag = "cython" if _ckernels is not None else "numpy*"

    out_compiled = compiled.conv1d_forward(x, k, stride)
    out_numpy = numpy_backend.conv1d_forward(x, k, stride)
    max_err = float(np.abs(out_compiled - out_numpy).max())

    t_compiled = _time(compiled.conv1d_forward, x, k, stride)
    t_numpy = _time(numpy_backend.conv1d_forward, x, k, stride)

    g = np.ones_like(out_compiled)
    gt_compiled = _time(compiled.conv1d_backward_kernels, g, x, stride, shape_k[2])
    gt_numpy = _time(numpy_backend.conv1d_backward_kernels, g, x, stride, shape_k[2])

    print(f"{name:<28} fwd {tag} {t_compiled*1e3:8.2f} ms vs numpy {t_numpy*1e3:8.2f} ms "
          f"| bwd-k {gt_compiled*1e3:8.2f} vs {gt_numpy*1e3:8.2f} | max err {max_err:.2e}")


def _bench_pool():
    rng = np.random.default_rng(1)
    x = rng.normal(size=(32, 16, 367)).astype(np.float32)
    out_a, idx_a = kernels.maxpool1d_forward(x, 4, 4)
    out_n, idx_n = numpy_backend.maxpool1d_forward(x, 4, 4)
    err = float(np.abs(out_a - out_n).max())
    same_idx = bool((idx_a == idx_n).all())
    t_a = _time(kernels.maxpool1d_forward, x, 4, 4)
    t_n = _time(numpy_backend.maxpool1d_forward, x, 4, 4)
    print(f"{'maxpool 32x16x367 w4 s4':<28} fwd {t_a*1e3:8.2f} ms vs numpy {t_n*1e3:8.2f} ms "
          f"| max err {err:.2e} idx match {same_idx}")


def main():
    print(f"active backend: {backend_name()}")
    _bench_case("text conv 32x32x64 k160w3", (32, 32, 64), (160, 32, 3), 1)
    _bench_case("signal stage1 32x1x12000", (32, 1, 12000), (8, 1, 32), 8)
    _bench_case("signal stage2 32x8x374", (32, 8, 374), (16, 8, 8), 1)
    _bench_pool()


if __name__ == "__main__":
    main()
