"""Run configuration: one JSON document driving every command.

The document has fixed sections (generator, model, train, probe, tsne,
paths) plus a global seed. Unknown keys anywhere are rejected up front, and
the digest of the effective (defaults-merged) configuration is recorded in
outputs for provenance. Component seeds default to the global seed unless a
section pins its own.
"""

from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import dataclass

from werprobe.corpus import EffectSizes, GeneratorConfig
from werprobe.errors import ConfigError
from werprobe.model import (
    LayerSpec,
    ModelConfig,
    SignalConfig,
    TextConfig,
    WerVector,
)
from werprobe.analysis.tsne import TsneConfig
from werprobe.probing import ProbeConfig
from werprobe.training import TrainConfig

TASK_SETS = ("SHOW", "STYLE", "ACCENT")

_EFFECT_KEYS = set(EffectSizes().__dict__)

_SCHEMA = {
    "seed": None,
    "generator": {
        "n_train": None, "n_dev": None, "n_test": None, "n_shows": None,
        "vocab_size": None, "sample_rate": None, "max_duration_s": None,
        "wer_means": {"TRAIN": None, "DEV": None, "TEST": None},
        "wer_max": None, "wer_noise": None,
        "effects": {k: None for k in _EFFECT_KEYS},
        "seed": None,
    },
    "model": {
        "layer_spec": {k: None for k in ("A1", "A2", "A3", "B1", "B2", "B3", "B4", "C1", "C2")},
        "text": {"max_tokens": None, "embed_dim": None, "filter_widths": None},
        "signal": {"input_len": None, "stages": None},
        "wer_vector": None,
        "branches": None,
    },
    "train": {
        "epochs": None, "batch_size": None, "optimizer": None, "learning_rate": None,
        "shuffle": None, "main_weight": None, "task_weight": None, "eval_batch": None,
        "seed": None,
    },
    "probe": {
        "hidden_size": None, "dropout_rate": None, "epochs": None, "batch_size": None,
        "seed": None,
    },
    "tsne": {
        "perplexity": None, "iterations": None, "learning_rate": None,
        "early_exaggeration": None, "exaggeration_iters": None, "momentum_start": None,
        "momentum_final": None, "momentum_switch": None, "entropy_tol": None,
        "max_bisection_steps": None, "seed": None,
    },
    "paths": {"out_dir": None, "corpus_dir": None},
}


def _validate_keys(doc, schema, path: str) -> None:
    if not isinstance(doc, dict):
        raise ConfigError(f"config section {path or '<root>'} must be an object")
    for key, value in doc.items():
        if key not in schema:
            where = f"{path}.{key}" if path else key
            raise ConfigError(f"unknown config key {where!r}")
        sub = schema[key]
        if isinstance(sub, dict):
            _validate_keys(value, sub, f"{path}.{key}" if path else key)


def _deep_merge(base: dict, override: dict) -> dict:
    out = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _deep_merge(out[key], value)
        else:
            out[key] = copy.deepcopy(value)
    return out


def _defaults() -> dict:
    gen = GeneratorConfig()
    train = TrainConfig()
    probe = ProbeConfig()
    tsne = TsneConfig()
    return {
        "seed": 0,
        "generator": gen.to_dict(),
        "model": {
            "layer_spec": dict(LayerSpec.desk().__dict__),
            "text": {
                "max_tokens": TextConfig().max_tokens,
                "embed_dim": TextConfig().embed_dim,
                "filter_widths": list(TextConfig().filter_widths),
            },
            "signal": {
                "input_len": SignalConfig().input_len,
                "stages": [list(s) for s in SignalConfig().stages],
            },
            "wer_vector": list(WerVector.default().centers),
            "branches": ["text", "signal"],
        },
        "train": {
            "epochs": train.epochs, "batch_size": train.batch_size,
            "optimizer": train.optimizer, "learning_rate": train.learning_rate,
            "shuffle": train.shuffle, "main_weight": train.main_weight,
            "task_weight": train.task_weight, "eval_batch": train.eval_batch,
            "seed": None,
        },
        "probe": {
            "hidden_size": probe.hidden_size, "dropout_rate": probe.dropout_rate,
            "epochs": probe.epochs, "batch_size": probe.batch_size, "seed": None,
        },
        "tsne": {
            "perplexity": tsne.perplexity, "iterations": tsne.iterations,
            "learning_rate": tsne.learning_rate,
            "early_exaggeration": tsne.early_exaggeration,
            "exaggeration_iters": tsne.exaggeration_iters,
            "momentum_start": tsne.momentum_start,
            "momentum_final": tsne.momentum_final,
            "momentum_switch": tsne.momentum_switch,
            "entropy_tol": tsne.entropy_tol,
            "max_bisection_steps": tsne.max_bisection_steps,
            "seed": None,
        },
        "paths": {"out_dir": "runs", "corpus_dir": "corpus"},
    }


class RunConfig:
    """Validated, defaults-merged configuration document."""

    def __init__(self, document: dict | None = None, seed_override: int | None = None):
        document = document or {}
        _validate_keys(document, _SCHEMA, "")
        merged = _deep_merge(_defaults(), document)
        if seed_override is not None:
            merged["seed"] = seed_override
        seed = merged["seed"]
        # sections inherit the global seed unless they pin one
        if "seed" not in document.get("generator", {}):
            merged["generator"]["seed"] = seed
        for section in ("train", "probe", "tsne"):
            if merged[section]["seed"] is None:
                merged[section]["seed"] = seed
        self.doc = merged

    @classmethod
    def from_file(cls, path: str, seed_override: int | None = None) -> "RunConfig":
        with open(path, "r", encoding="utf-8") as f:
            try:
                document = json.load(f)
            except json.JSONDecodeError as e:
                raise ConfigError(f"{path}: invalid JSON at line {e.lineno}") from e
        return cls(document, seed_override)

    @property
    def seed(self) -> int:
        return self.doc["seed"]

    def digest(self) -> str:
        canonical = json.dumps(self.doc, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode()).hexdigest()

    def generator_config(self) -> GeneratorConfig:
        try:
            return GeneratorConfig.from_dict(self.doc["generator"])
        except TypeError as e:
            raise ConfigError(f"bad generator section: {e}") from e

    def train_config(self, task_weight: float | None = None) -> TrainConfig:
        d = dict(self.doc["train"])
        if task_weight is not None:
            d["task_weight"] = task_weight
        try:
            return TrainConfig(**d)
        except TypeError as e:
            raise ConfigError(f"bad train section: {e}") from e

    def probe_config(self) -> ProbeConfig:
        try:
            return ProbeConfig(**self.doc["probe"])
        except TypeError as e:
            raise ConfigError(f"bad probe section: {e}") from e

    def tsne_config(self) -> TsneConfig:
        try:
            return TsneConfig(**self.doc["tsne"])
        except TypeError as e:
            raise ConfigError(f"bad tsne section: {e}") from e

    def model_config(self, vocab_size: int, task_labels: dict, seed: int | None = None) -> ModelConfig:
        m = self.doc["model"]
        try:
            return ModelConfig(
                layer_spec=LayerSpec(**m["layer_spec"]),
                vocab_size=vocab_size,
                text=TextConfig(
                    max_tokens=m["text"]["max_tokens"],
                    embed_dim=m["text"]["embed_dim"],
                    filter_widths=tuple(m["text"]["filter_widths"]),
                ),
                signal=SignalConfig(
                    input_len=m["signal"]["input_len"],
                    stages=tuple(tuple(s) for s in m["signal"]["stages"]),
                ),
                wer_vector=WerVector(tuple(m["wer_vector"])),
                task_labels=task_labels,
                branches=tuple(m["branches"]),
                seed=self.seed if seed is None else seed,
            )
        except TypeError as e:
            raise ConfigError(f"bad model section: {e}") from e


@dataclass(frozen=True)
class ExperimentSystem:
    name: str
    tasks: tuple[str, ...]


@dataclass
class ExperimentManifest:
    systems: list

    def __post_init__(self):
        names = [s.name for s in self.systems]
        if len(set(names)) != len(names):
            raise ConfigError("manifest system names must be unique")
        for s in self.systems:
            for t in s.tasks:
                if t not in TASK_SETS:
                    raise ConfigError(f"system {s.name}: unknown task {t!r}")


def default_manifest() -> ExperimentManifest:
    """One mono-task baseline plus every auxiliary-task combination."""
    rows = [
        ("WER", ()),
        ("WER+SHOW", ("SHOW",)),
        ("WER+STYLE", ("STYLE",)),
        ("WER+ACCENT", ("ACCENT",)),
        ("WER+STYLE+ACCENT", ("STYLE", "ACCENT")),
        ("WER+SHOW+ACCENT", ("SHOW", "ACCENT")),
        ("WER+SHOW+STYLE", ("SHOW", "STYLE")),
        ("WER+SHOW+STYLE+ACCENT", ("SHOW", "STYLE", "ACCENT")),
    ]
    return ExperimentManifest([ExperimentSystem(n, t) for n, t in rows])
