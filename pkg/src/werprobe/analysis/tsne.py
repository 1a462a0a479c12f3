"""t-SNE projection to 2-D with perplexity-matched Gaussian neighborhoods.

Per-point bandwidths are found by binary search on the conditional entropy;
the symmetrized neighbor distribution is then matched by a Student-t
distribution in the plane via gradient descent with momentum, per-dimension
gain adaptation, and early exaggeration. Deterministic under a seed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from werprobe.errors import ConfigError, ShapeError

_P_FLOOR = 1e-12


@dataclass
class TsneConfig:
    perplexity: float = 30.0
    iterations: int = 1000
    learning_rate: float = 200.0
    early_exaggeration: float = 12.0
    exaggeration_iters: int = 250
    momentum_start: float = 0.5
    momentum_final: float = 0.8
    momentum_switch: int = 250
    entropy_tol: float = 1e-5
    max_bisection_steps: int = 50
    seed: int = 0

    def __post_init__(self):
        if self.iterations < 1:
            raise ConfigError(f"iterations must be >= 1, got {self.iterations}")
        if self.perplexity <= 0:
            raise ConfigError(f"perplexity must be positive, got {self.perplexity}")


@dataclass
class TsneResult:
    coordinates: np.ndarray  # (N, 2)
    initial_kl: float
    final_kl: float
    effective_perplexity: float


def _pairwise_sq_dists(x: np.ndarray) -> np.ndarray:
    sq = (x**2).sum(axis=1)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (x @ x.T)
    np.fill_diagonal(d2, 0.0)
    return np.maximum(d2, 0.0)


def _entropy_and_row(d_row: np.ndarray, beta: float) -> tuple[float, np.ndarray]:
    """Shannon entropy (nats) and normalized affinities for one bandwidth."""
    p = np.exp(-d_row * beta)
    s = p.sum()
    if s <= 0.0:
        return 0.0, np.zeros_like(p)
    h = np.log(s) + beta * float((d_row * p).sum()) / s
    return h, p / s

def conditional_probabilities(
    points: np.ndarray,
    perplexity: float,
    tol: float = 1e-5,
    max_steps: int = 50,
) -> np.ndarray:
    """Row-stochastic conditional affinity matrix with per-row bandwidths
    chosen so each row's entropy matches log(perplexity)."""
    x = np.asarray(points, dtype=np.float64)
    if x.ndim != 2:
        raise ShapeError(f"points must be a matrix, got shape {x.shape}")
    n = x.shape[0]
    if perplexity >= n:
        raise ConfigError(f"perplexity {perplexity} must be below the point count {n}")
    d2 = _pairwise_sq_dists(x)
    target = np.log(perplexity)
    p = np.zeros((n, n))
    mask = ~np.eye(n, dtype=bool)
    for i in range(n):
        row = d2[i][mask[i]]
        beta, lo, hi = 1.0, 0.0, np.inf
        h, affinity = _entropy_and_row(row, beta)
        for _ in range(max_steps):
            if abs(h - target) < tol:
                break
            if h > target:  # too spread out: tighten
                lo = beta
                beta = beta * 2.0 if hi == np.inf else (beta + hi) / 2.0
            else:
                hi = beta
                beta = (beta + lo) / 2.0
            h, affinity = _entropy_and_row(row, beta)
        p[i][mask[i]] = affinity
    return p


def _kl(p: np.ndarray, q: np.ndarray) -> float:
    return float((p * np.log(p / q)).sum())


def tsne_project(points: np.ndarray, config: TsneConfig | None = None) -> TsneResult:
    """Project points to 2-D; records KL divergence before and after descent."""
    config = config or TsneConfig()
    x = np.asarray(points, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] < 1:
        raise ShapeError(f"points must be a (N, D) matrix, got shape {x.shape}")
    n = x.shape[0]
    if n < 4:
        raise ConfigError(f"t-SNE needs at least 4 points, got {n}")
    effective = min(config.perplexity, (n - 1) / 3.0)
    if effective >= n:
        raise ConfigError(f"perplexity {effective} must be below the point count {n}")

    cond = conditional_probabilities(
        x, effective, config.entropy_tol, config.max_bisection_steps
    )
    p = (cond + cond.T) / (2.0 * n)
    p = np.maximum(p, _P_FLOOR)

    rng = np.random.default_rng(config.seed)
    y = rng.normal(0.0, 1e-4, size=(n, 2))
    velocity = np.zeros_like(y)
    gains = np.ones_like(y)

    def q_of(coords: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        num = 1.0 / (1.0 + _pairwise_sq_dists(coords))
        np.fill_diagonal(num, 0.0)
        q = np.maximum(num / num.sum(), _P_FLOOR)
        return q, num

    q, _ = q_of(y)
    initial_kl = _kl(p, q)

    for it in range(config.iterations):
        p_eff = p * config.early_exaggeration if it < config.exaggeration_iters else p
        q, num = q_of(y)
        pq = (p_eff - q) * num
        grad = 4.0 * ((pq.sum(axis=1)[:, None] * y) - pq @ y)
        momentum = (
            config.momentum_start if it < config.momentum_switch else config.momentum_final
        )
        flips = np.sign(grad) != np.sign(velocity)
        gains = np.where(flips, gains + 0.2, gains * 0.8)
        np.maximum(gains, 0.01, out=gains)
        velocity = momentum * velocity - config.learning_rate * gains * grad
        y = y + velocity
        y = y - y.mean(axis=0)

    q, _ = q_of(y)
    final_kl = _kl(p, q)
    return TsneResult(
        coordinates=y, initial_kl=initial_kl, final_kl=final_kl,
        effective_perplexity=effective,
    )
