"""Finite-difference gradient checking helpers shared by the test suite.

Checks are driven by a factory ``make(dtype) -> (build, params)`` that
constructs the same graph at a chosen precision from the same underlying
values. The finite-difference oracle always runs on the float64 graph so
its own noise sits far below both tolerances; the float32 check compares
the float32 backprop gradients against that float64 oracle. Step sizes
are validated against the measured distance to the nearest non-smooth
point (relu zero crossings, pooling ties) so central differences never
straddle a kink.
"""

from __future__ import annotations

import numpy as np

from werprobe.engine import backward
from werprobe.engine.tensor import Tensor

DEFAULT_H = 1e-5
MIN_MARGIN = 1e-3
TOL32 = 1e-3
TOL64 = 1e-6


def graph_nodes(root: Tensor) -> list[Tensor]:
    """All nodes reachable from the root, each visited once."""
    seen, order, stack = set(), [], [root]
    while stack:
        node = stack.pop()
        if id(node) in seen:
            continue
        seen.add(id(node))
        order.append(node)
        stack.extend(node._parents)
    return order


def _tie_gap(windows: np.ndarray) -> float:
    """Smallest nonzero max-vs-runner-up gap.

    Exact ties are not differentiability hazards here: with continuous
    random weights they only arise between functionally identical units
    (repeated tokens under the same filter, or relu-clamped zeros), which
    move together under any parameter perturbation, leaving the argmax
    stable. Small nonzero gaps are the real near-crossings.
    """
    top2 = np.sort(windows, axis=-1)[..., -2:]
    gaps = top2[..., 1] - top2[..., 0]
    live = gaps > 0.0
    if not live.any():
        return np.inf
    return float(gaps[live].min())


def _pool_margin(values: np.ndarray, width: int, stride: int) -> float:
    """Smallest live max-vs-runner-up gap over pooling windows."""
    v = values.reshape(-1, values.shape[-1])
    margin = np.inf
    for start in range(0, v.shape[1] - width + 1, stride):
        window = v[:, start:start + width]
        if window.shape[1] < 2:
            continue
        margin = min(margin, _tie_gap(window))
    return margin


def kink_margin(loss: Tensor, pool_shapes: dict | None = None) -> float:
    """Distance from the built graph to its nearest non-differentiable point.

    ``pool_shapes`` maps id(node) -> (width, stride) for maxpool1d nodes,
    supplied by the caller that built the graph.
    """
    margin = np.inf
    for node in graph_nodes(loss):
        parent = node._parents[0] if node._parents else None
        if node._op == "relu":
            margin = min(margin, float(np.abs(parent.data).min()))
        elif node._op == "gmax" and parent.data.shape[-1] >= 2:
            margin = min(margin, _tie_gap(parent.data))
        elif node._op == "maxpool1d" and pool_shapes and id(node) in pool_shapes:
            width, stride = pool_shapes[id(node)]
            margin = min(margin, _pool_margin(parent.data, width, stride))
    return margin


def relative_error(analytic: np.ndarray, numeric: np.ndarray) -> float:
    """Largest entry error, normalized by the largest gradient magnitude."""
    a = np.asarray(analytic, dtype=np.float64)
    n = np.asarray(numeric, dtype=np.float64)
    scale = max(float(np.abs(a).max(initial=0.0)), float(np.abs(n).max(initial=0.0)), 1e-8)
    return float(np.abs(a - n).max(initial=0.0)) / scale


def analytic_gradients(build, params) -> dict[str, np.ndarray]:
    """Build the loss once, backpropagate, and collect gradients by name."""
    for p in params:
        p.zero_grad()
    loss = build()
    backward(loss)
    return {p.name: np.array(p.grad, dtype=np.float64, copy=True) for p in params}


def fd_gradient(build, param, coords, h: float) -> np.ndarray:
    """Central differences of the loss along the given flat coordinates."""
    flat = param.data.reshape(-1)
    out = np.empty(len(coords), dtype=np.float64)
    for j, c in enumerate(coords):
        keep = flat[c]
        flat[c] = keep + h
        up = float(build().data)
        flat[c] = keep - h
        down = float(build().data)
        flat[c] = keep
        out[j] = (up - down) / (2.0 * h)
    return out


def dual_precision_check(make, coords_per_param=None, h: float = DEFAULT_H,
                         min_margin: float = MIN_MARGIN,
                         coord_rng: np.random.Generator | None = None,
                         pool_shapes_of=None, frozen: dict | None = None
                         ) -> tuple[float, float, float]:
    """Backprop-vs-FD errors at both precisions for one random instance.

    Returns ``(err32, err64, margin)``. ``make(dtype)`` must rebuild the
    same graph from the same values at the requested dtype. When
    ``coords_per_param`` is None every coordinate is checked; otherwise a
    seeded subset per parameter. ``frozen`` maps a parameter name to flat
    coordinates that backprop zeroes by convention (the embedding pad row),
    which finite differences must not probe. The margin lets callers
    regenerate instances that sit too close to a kink for the step size.
    """
    build64, params64 = make(np.float64)
    loss64 = build64()
    margin = kink_margin(loss64, pool_shapes_of(loss64) if pool_shapes_of else None)
    if margin < min_margin:
        return np.inf, np.inf, margin

    grads64 = analytic_gradients(build64, params64)
    build32, params32 = make(np.float32)
    grads32 = analytic_gradients(build32, params32)

    # one gradient vector, one scale: tensors with tiny gradients (a nearly
    # balanced head bias, say) must not inflate the relative error beyond
    # what the FD noise floor supports
    triples = []
    for p in params64:
        allowed = np.arange(p.data.size)
        if frozen and p.name in frozen:
            allowed = np.setdiff1d(allowed, np.asarray(frozen[p.name]))
        if allowed.size == 0:
            continue
        if coords_per_param is None or coords_per_param >= allowed.size:
            coords = allowed
        else:
            coords = coord_rng.choice(allowed, size=coords_per_param, replace=False)
        numeric = fd_gradient(build64, p, coords, h)
        triples.append((grads32[p.name].reshape(-1)[coords],
                        grads64[p.name].reshape(-1)[coords], numeric))

    a32 = np.concatenate([t[0] for t in triples])
    a64 = np.concatenate([t[1] for t in triples])
    num = np.concatenate([t[2] for t in triples])
    return relative_error(a32, num), relative_error(a64, num), margin
