"""Shared fixtures: micro-scale model configs and a small synthetic corpus."""

import numpy as np
import pytest

from werprobe.corpus import GeneratorConfig, generate_synthetic_corpus
from werprobe.model import LayerSpec, ModelConfig, SignalConfig, TextConfig, WerVector


def micro_layer_spec() -> LayerSpec:
    return LayerSpec(A1=10, A2=6, A3=4, B1=4, B2=6, B3=6, B4=4, C1=8, C2=6)


def micro_model_config(vocab_size: int = 17, task_labels: dict | None = None,
                       seed: int = 0, branches=("text", "signal")) -> ModelConfig:
    """Smallest config that still exercises every layer and both branches."""
    spec = micro_layer_spec()
    if branches == ("text",):
        spec = LayerSpec(A1=10, A2=6, A3=4, B1=4, B2=6, B3=6, B4=4, C1=4, C2=6)
    elif branches == ("signal",):
        spec = LayerSpec(A1=10, A2=6, A3=4, B1=4, B2=6, B3=6, B4=4, C1=4, C2=6)
    return ModelConfig(
        layer_spec=spec,
        vocab_size=vocab_size,
        text=TextConfig(max_tokens=10, embed_dim=6),
        signal=SignalConfig(input_len=64, stages=((2, 6, 2, 2), (4, 4, 1, 2))),
        wer_vector=WerVector((0.0, 25.0, 50.0, 75.0, 100.0)),
        task_labels=dict(task_labels or {}),
        branches=tuple(branches),
        seed=seed,
    )


@pytest.fixture(scope="session")
def tiny_corpus():
    cfg = GeneratorConfig(n_train=160, n_dev=80, n_test=60, seed=11)
    return generate_synthetic_corpus(cfg)


@pytest.fixture(scope="session")
def micro_batch():
    """Token ids and signals sized for micro_model_config."""
    rng = np.random.default_rng(42)
    ids = rng.integers(0, 17, size=(3, 10))
    ids[:, 7:] = 0
    signals = rng.normal(size=(3, 64)).astype(np.float32)
    wers = rng.uniform(5.0, 60.0, size=3)
    return ids, signals, wers
