"""First-order optimizers operating on :class:`Parameter` lists.

Both optimizers keep per-parameter state arrays keyed by parameter name and
update in place. The single-step functions are exposed so the update rules
can be tested against closed-form trajectories.
"""

from __future__ import annotations

import numpy as np

from werprobe.engine.tensor import Parameter
from werprobe.errors import ConfigError


def adam_step(
    param: np.ndarray,
    grad: np.ndarray,
    m: np.ndarray,
    v: np.ndarray,
    t: int,
    lr: float = 0.001,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
) -> None:
    """One Adam update, in place. ``t`` is the 1-based step count."""
    if t < 1:
        raise ConfigError(f"adam_step: step count must be >= 1, got {t}")
    m *= beta1
    m += (1.0 - beta1) * grad
    v *= beta2
    v += (1.0 - beta2) * grad * grad
    m_hat = m / (1.0 - beta1**t)
    v_hat = v / (1.0 - beta2**t)
    param -= lr * m_hat / (np.sqrt(v_hat) + eps)


def adadelta_step(
    param: np.ndarray,
    grad: np.ndarray,
    accum_grad: np.ndarray,
    accum_update: np.ndarray,
    rho: float = 0.95,
    eps: float = 1e-6,
    lr: float = 1.0,
) -> None:
    """One Adadelta update, in place; step sizes adapt from running averages."""
    accum_grad *= rho
    accum_grad += (1.0 - rho) * grad * grad
    update = np.sqrt(accum_update + eps) / np.sqrt(accum_grad + eps) * grad
    accum_update *= rho
    accum_update += (1.0 - rho) * update * update
    param -= lr * update


class Adam:
    """Adam with bias correction; defaults follow the original recipe."""

    def __init__(
        self,
        params: list[Parameter],
        lr: float = 0.001,
        beta1: float = 0.9,
        beta2: float = 0.999,
        eps: float = 1e-8,
    ) -> None:
        if not 0.0 <= beta1 < 1.0 or not 0.0 <= beta2 < 1.0:
            raise ConfigError(f"Adam: betas must be in [0, 1), got {beta1}/{beta2}")
        self.params = list(params)
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.t = 0
        self._m = {p.name: np.zeros_like(p.data) for p in self.params}
        self._v = {p.name: np.zeros_like(p.data) for p in self.params}

    def step(self) -> None:
        self.t += 1
        for p in self.params:
            if p.grad is None:
                continue
            adam_step(
                p.data, p.grad, self._m[p.name], self._v[p.name], self.t,
                self.lr, self.beta1, self.beta2, self.eps,
            )

    def zero_grad(self) -> None:
        for p in self.params:
            p.zero_grad()


class Adadelta:
    """Adadelta; lr=1.0 leaves the adaptive step size unscaled."""

    def __init__(
        self,
        params: list[Parameter],
        rho: float = 0.95,
        eps: float = 1e-6,
        lr: float = 1.0,
    ) -> None:
        if not 0.0 <= rho < 1.0:
            raise ConfigError(f"Adadelta: rho must be in [0, 1), got {rho}")
        self.params = list(params)
        self.rho, self.eps, self.lr = rho, eps, lr
        self._accum_grad = {p.name: np.zeros_like(p.data) for p in self.params}
        self._accum_update = {p.name: np.zeros_like(p.data) for p in self.params}

    def step(self) -> None:
        for p in self.params:
            if p.grad is None:
                continue
            adadelta_step(
                p.data, p.grad, self._accum_grad[p.name], self._accum_update[p.name],
                self.rho, self.eps, self.lr,
            )

    def zero_grad(self) -> None:
        for p in self.params:
            p.zero_grad()
