"""Reverse-mode differentiable arrays.

A Tensor wraps a numpy array and remembers how it was produced; calling
:func:`backward` on a scalar result walks the recorded graph in reverse
topological order and accumulates gradients into every reachable tensor.
Parameters are named leaf tensors whose gradient buffer persists between
steps (training zeroes it explicitly).

Values are float32 by default; :func:`using_dtype` switches new tensors to
float64 for tight gradient checks.
"""

from __future__ import annotations

from contextlib import contextmanager
from typing import Callable, Iterator, Sequence

import numpy as np

from werprobe.errors import ShapeError

_default_dtype = np.dtype(np.float32)


def get_default_dtype() -> np.dtype:
    return _default_dtype


def set_default_dtype(dtype) -> None:
    global _default_dtype
    dt = np.dtype(dtype)
    if dt not in (np.dtype(np.float32), np.dtype(np.float64)):
        raise ShapeError(f"unsupported value dtype {dt}; use float32 or float64")
    _default_dtype = dt


@contextmanager
def using_dtype(dtype) -> Iterator[None]:
    """Temporarily change the dtype used for newly created tensors."""
    previous = _default_dtype
    set_default_dtype(dtype)
    try:
        yield
    finally:
        set_default_dtype(previous)


class Tensor:
    """A node in the computation graph."""

    __slots__ = ("data", "grad", "_parents", "_backward", "_op")

    def __init__(
        self,
        data,
        parents: Sequence["Tensor"] = (),
        backward: Callable[[np.ndarray], None] | None = None,
        op: str = "",
    ):
        arr = np.asarray(data)
        if not parents and arr.dtype != _default_dtype:
            # leaf tensors adopt the configured dtype; op results keep theirs
            arr = arr.astype(_default_dtype)
        self.data = arr
        self.grad: np.ndarray | None = None
        self._parents = tuple(parents)
        self._backward = backward
        self._op = op

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def dtype(self) -> np.dtype:
        return self.data.dtype

    def item(self) -> float:
        return float(self.data)

    def accumulate(self, g: np.ndarray) -> None:
        if self.grad is None:
            self.grad = np.zeros_like(self.data)
        self.grad += g

    def __repr__(self) -> str:
        tag = f" op={self._op}" if self._op else ""
        return f"Tensor(shape={self.data.shape}, dtype={self.data.dtype}{tag})"

    # Arithmetic is limited to what the models need: same-shape addition
    # and scaling by a python float.

    def __add__(self, other: "Tensor") -> "Tensor":
        if not isinstance(other, Tensor):
            return NotImplemented
        if self.data.shape != other.data.shape:
            raise ShapeError(
                f"add: shapes {self.data.shape} and {other.data.shape} differ"
            )
        out = Tensor(self.data + other.data, parents=(self, other), op="add")

        def _bw(g: np.ndarray) -> None:
            self.accumulate(g)
            other.accumulate(g)

        out._backward = _bw
        return out

    def __mul__(self, scalar) -> "Tensor":
        if isinstance(scalar, Tensor):
            return NotImplemented
        c = float(scalar)
        out = Tensor(self.data * c, parents=(self,), op="scale")

        def _bw(g: np.ndarray) -> None:
            self.accumulate(g * c)

        out._backward = _bw
        return out

    __rmul__ = __mul__


class Parameter(Tensor):
    """Named trainable leaf with a persistent gradient buffer."""

    __slots__ = ("name",)

    def __init__(self, name: str, value):
        if not name:
            raise ShapeError("parameter name must be nonempty")
        super().__init__(value)
        self.name = name
        self.grad = np.zeros_like(self.data)

    def zero_grad(self) -> None:
        self.grad[...] = 0.0


def _toposort(root: Tensor) -> list[Tensor]:
    order: list[Tensor] = []
    seen: set[int] = set()
    stack: list[tuple[Tensor, bool]] = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for parent in node._parents:
            if id(parent) not in seen:
                stack.append((parent, False))
    return order


def backward(loss: Tensor) -> None:
    """Populate gradients of everything reachable from a scalar loss."""
    if loss.data.size != 1:
        raise ShapeError(f"backward root must be a scalar, got shape {loss.data.shape}")
    order = _toposort(loss)
    loss.grad = np.ones_like(loss.data)
    for node in reversed(order):
        if node._backward is not None and node.grad is not None:
            node._backward(node.grad)
