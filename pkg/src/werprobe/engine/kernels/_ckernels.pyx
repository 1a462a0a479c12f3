# Compiled versions of the hot kernels: 1-D cross-correlation (forward and
# both backward passes) and windowed max pooling. Loop order keeps the
# innermost accesses contiguous so the C compiler can vectorize them.

import numpy as np

cimport numpy as cnp

cnp.import_array()

ctypedef fused floating:
    float
    double

NAME = "cython"


def conv1d_forward(floating[:, :, ::1] x, floating[:, :, ::1] kernels, Py_ssize_t stride):
    cdef Py_ssize_t n = x.shape[0], c_in = x.shape[1], length = x.shape[2]
    cdef Py_ssize_t c_out = kernels.shape[0], width = kernels.shape[2]
    cdef Py_ssize_t n_out = (length - width) // stride + 1
    if floating is float:
        dtype = np.float32
    else:
        dtype = np.float64
    out_arr = np.zeros((n, c_out, n_out), dtype=dtype)
    cdef floating[:, :, ::1] out = out_arr
    cdef Py_ssize_t b, o, t, i, j, base
    cdef floating acc
    with nogil:
        for b in range(n):
            for o in range(c_out):
                for t in range(n_out):
                    base = t * stride
                    acc = 0
                    for i in range(c_in):
                        for j in range(width):
                            acc = acc + x[b, i, base + j] * kernels[o, i, j]
                    out[b, o, t] = acc
    return out_arr


def conv1d_backward_input(floating[:, :, ::1] gy, floating[:, :, ::1] kernels,
                          Py_ssize_t stride, Py_ssize_t length):
    cdef Py_ssize_t n = gy.shape[0], c_out = gy.shape[1], n_out = gy.shape[2]
    cdef Py_ssize_t c_in = kernels.shape[1], width = kernels.shape[2]
    if floating is float:
        dtype = np.float32
    else:
        dtype = np.float64
    gx_arr = np.zeros((n, c_in, length), dtype=dtype)
    cdef floating[:, :, ::1] gx = gx_arr
    cdef Py_ssize_t b, o, t, i, j, base
    cdef floating g
    with nogil:
        for b in range(n):
            for o in range(c_out):
                for t in range(n_out):
                    g = gy[b, o, t]
                    base = t * stride
                    for i in range(c_in):
                        for j in range(width):
                            gx[b, i, base + j] = gx[b, i, base + j] + g * kernels[o, i, j]
    return gx_arr


def conv1d_backward_kernels(floating[:, :, ::1] gy, floating[:, :, ::1] x,
                            Py_ssize_t stride, Py_ssize_t width):
    cdef Py_ssize_t n = gy.shape[0], c_out = gy.shape[1], n_out = gy.shape[2]
    cdef Py_ssize_t c_in = x.shape[1]
    if floating is float:
        dtype = np.float32
    else:
        dtype = np.float64
    gk_arr = np.zeros((c_out, c_in, width), dtype=dtype)
    cdef floating[:, :, ::1] gk = gk_arr
    cdef Py_ssize_t b, o, t, i, j, base
    cdef floating g
    with nogil:
        for b in range(n):
            for o in range(c_out):
                for t in range(n_out):
                    g = gy[b, o, t]
                    base = t * stride
                    for i in range(c_in):
                        for j in range(width):
                            gk[o, i, j] = gk[o, i, j] + g * x[b, i, base + j]
    return gk_arr


def maxpool1d_forward(floating[:, :, ::1] x, Py_ssize_t width, Py_ssize_t stride):
    cdef Py_ssize_t n = x.shape[0], c = x.shape[1], length = x.shape[2]
    cdef Py_ssize_t n_out = (length - width) // stride + 1
    if floating is float:
        dtype = np.float32
    else:
        dtype = np.float64
    out_arr = np.empty((n, c, n_out), dtype=dtype)
    idx_arr = np.empty((n, c, n_out), dtype=np.int64)
    cdef floating[:, :, ::1] out = out_arr
    cdef cnp.int64_t[:, :, ::1] idx = idx_arr
    cdef Py_ssize_t b, ch, t, j, base, best_j
    cdef floating best
    with nogil:
        for b in range(n):
            for ch in range(c):
                for t in range(n_out):
                    base = t * stride
                    best = x[b, ch, base]
                    best_j = base
                    for j in range(1, width):
                        # strict comparison keeps the lowest index on ties
                        if x[b, ch, base + j] > best:
                            best = x[b, ch, base + j]
                            best_j = base + j
                    out[b, ch, t] = best
                    idx[b, ch, t] = best_j
    return out_arr, idx_arr


def maxpool1d_backward(floating[:, :, ::1] gy, cnp.int64_t[:, :, ::1] idx, Py_ssize_t length):
    cdef Py_ssize_t n = gy.shape[0], c = gy.shape[1], n_out = gy.shape[2]
    if floating is float:
        dtype = np.float32
    else:
        dtype = np.float64
    gx_arr = np.zeros((n, c, length), dtype=dtype)
    cdef floating[:, :, ::1] gx = gx_arr
    cdef Py_ssize_t b, ch, t
    with nogil:
        for b in range(n):
            for ch in range(c):
                for t in range(n_out):
                    gx[b, ch, idx[b, ch, t]] = gx[b, ch, idx[b, ch, t]] + gy[b, ch, t]
    return gx_arr
