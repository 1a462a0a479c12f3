"""Frozen-representation extraction and the layer-wise probing experiment.

For each (task, layer) pair: balance the corpus for the task, extract that
layer's activations with the model frozen, train a shallow classifier on
TRAIN activations with DEV-based selection, and report DEV (and, except for
SHOW, TEST) accuracy next to the chance level of the balanced data. SHOW is
reported on DEV only because TEST shows are unseen by construction.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass, field

import numpy as np

from werprobe import corpus as corpus_mod
from werprobe.corpus import BalanceSpec, Corpus, Utterance, balance_for_task, default_excluded
from werprobe.errors import ConfigError, DataError, FormatError
from werprobe.model import LAYER_NAMES, Model, Probe
from werprobe.training import TrainLog, train_probe

PROBE_TABLE_HEADER = "layer,dim,show_dev,style_dev,style_test,accent_dev,accent_test"


@dataclass
class ProbeConfig:
    hidden_size: int = 128
    dropout_rate: float = 0.5
    epochs: int = 30
    batch_size: int = 16
    seed: int = 0

    def __post_init__(self):
        if self.hidden_size < 1:
            raise ConfigError(f"hidden_size must be >= 1, got {self.hidden_size}")
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ConfigError(f"dropout_rate must be in [0, 1), got {self.dropout_rate}")


@dataclass
class ActivationSet:
    """Frozen activations of one layer for a set of utterances."""

    layer: str
    matrix: np.ndarray  # (N, dim) float32
    labels: list
    utterance_ids: list
    source_model_digest: str

    def __post_init__(self):
        if self.matrix.ndim != 2:
            raise ConfigError(f"activation matrix must be 2-D, got {self.matrix.shape}")
        if not (self.matrix.shape[0] == len(self.labels) == len(self.utterance_ids)):
            raise DataError(
                f"activation rows ({self.matrix.shape[0]}), labels ({len(self.labels)}) "
                f"and ids ({len(self.utterance_ids)}) must agree"
            )


def extract_all_layers(
    model: Model, utterances: list[Utterance], batch: int = 64
) -> dict[str, np.ndarray]:
    """One inference pass per batch, collecting every named layer at once."""
    layers = [l for l in LAYER_NAMES if _layer_available(model, l)]
    ids, signals, _ = corpus_mod.batch_arrays(
        utterances,
        model.config.vocab_size,
        model.config.text.max_tokens,
        model.config.signal.input_len,
    )
    n = len(utterances)
    out = {
        l: np.empty((n, model.config.layer_spec.width(l)), dtype=np.float32) for l in layers
    }
    for lo in range(0, n, batch):
        hi = min(lo + batch, n)
        acts = model.forward(ids[lo:hi], signals[lo:hi])
        for l in layers:
            out[l][lo:hi] = acts[l].data
    return out


def _layer_available(model: Model, layer: str) -> bool:
    if layer in ("A1", "A2", "A3"):
        return "text" in model.config.branches
    if layer in ("B1", "B2", "B3", "B4"):
        return "signal" in model.config.branches
    return True


def extract_activations(
    model: Model, utterances: list[Utterance], layer: str, task: str, batch: int = 64
) -> ActivationSet:
    """Extract one layer's activations labeled for one task."""
    if layer not in LAYER_NAMES:
        raise ConfigError(f"unknown layer {layer!r}; valid layers are {LAYER_NAMES}")
    if not _layer_available(model, layer):
        raise ConfigError(f"layer {layer} is absent: model branches are {model.config.branches}")
    matrices = extract_all_layers(model, utterances, batch)
    return ActivationSet(
        layer=layer,
        matrix=matrices[layer],
        labels=[u.label(task) for u in utterances],
        utterance_ids=[u.id for u in utterances],
        source_model_digest=model.digest(),
    )


def build_probe(input_dim: int, n_classes: int, config: ProbeConfig) -> Probe:
    return Probe(
        input_dim=input_dim,
        n_classes=n_classes,
        hidden_size=config.hidden_size,
        dropout_rate=config.dropout_rate,
        seed=config.seed,
    )


def save_activation_set(acts: ActivationSet, path: str) -> None:
    """Directory layout: meta.json + activations.bin (row-major f32 LE) + labels.csv."""
    os.makedirs(path, exist_ok=True)
    meta = {
        "layer": acts.layer,
        "rows": int(acts.matrix.shape[0]),
        "dim": int(acts.matrix.shape[1]),
        "source_model_digest": acts.source_model_digest,
    }
    with open(os.path.join(path, "meta.json"), "w", encoding="utf-8") as f:
        f.write(json.dumps(meta, sort_keys=True, separators=(",", ":")))
    np.ascontiguousarray(acts.matrix, dtype="<f4").tofile(os.path.join(path, "activations.bin"))
    with open(os.path.join(path, "labels.csv"), "w", encoding="utf-8") as f:
        f.write("id,label\n")
        for uid, label in zip(acts.utterance_ids, acts.labels):
            f.write(f"{uid},{label}\n")


def load_activation_set(path: str) -> ActivationSet:
    meta_path = os.path.join(path, "meta.json")
    try:
        with open(meta_path, "r", encoding="utf-8") as f:
            meta = json.load(f)
    except json.JSONDecodeError as e:
        raise FormatError(f"{meta_path}: invalid JSON") from e
    raw = np.fromfile(os.path.join(path, "activations.bin"), dtype="<f4")
    rows, dim = meta["rows"], meta["dim"]
    if raw.size != rows * dim:
        raise FormatError(
            f"activations.bin holds {raw.size} values, meta expects {rows}x{dim}"
        )
    ids, labels = [], []
    labels_path = os.path.join(path, "labels.csv")
    with open(labels_path, "r", encoding="utf-8") as f:
        header = f.readline().strip()
        if header != "id,label":
            raise FormatError(f"{labels_path}: bad header {header!r}")
        for lineno, line in enumerate(f, start=2):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 2:
                raise FormatError(f"{labels_path}:{lineno}: expected 'id,label'")
            ids.append(parts[0])
            labels.append(parts[1])
    return ActivationSet(
        layer=meta["layer"],
        matrix=raw.reshape(rows, dim).copy(),
        labels=labels,
        utterance_ids=ids,
        source_model_digest=meta["source_model_digest"],
    )


@dataclass
class ProbeCell:
    task: str
    layer: str
    dim: int
    dev_accuracy: float
    test_accuracy: float | None
    chance: float


@dataclass
class ProbeTable:
    """Accuracy grid: one row per layer, task columns, plus the chance row."""

    layers: list
    tasks: list
    cells: dict = field(default_factory=dict)  # (task, layer) -> ProbeCell
    chance: dict = field(default_factory=dict)  # task -> chance accuracy

    def cell(self, task: str, layer: str) -> ProbeCell:
        return self.cells[(task, layer)]

    def to_csv(self) -> str:
        def pct(v: float | None) -> str:
            return "" if v is None else repr(round(100.0 * v, 4))

        lines = [PROBE_TABLE_HEADER]
        for layer in self.layers:
            dim = next(
                (c.dim for (t, l), c in self.cells.items() if l == layer), 0
            )
            row = [layer, str(dim)]
            for task, with_test in (("SHOW", False), ("STYLE", True), ("ACCENT", True)):
                c = self.cells.get((task, layer))
                row.append(pct(c.dev_accuracy) if c else "")
                if with_test:
                    row.append(pct(c.test_accuracy) if c else "")
            lines.append(",".join(row))
        chance_row = ["chance", ""]
        for task, with_test in (("SHOW", False), ("STYLE", True), ("ACCENT", True)):
            v = self.chance.get(task)
            chance_row.append(pct(v))
            if with_test:
                chance_row.append(pct(v))
        lines.append(",".join(chance_row))
        return "\n".join(lines) + "\n"


def run_probe_suite(
    model: Model,
    corpus: Corpus,
    tasks: tuple[str, ...] = ("SHOW", "STYLE", "ACCENT"),
    layers: tuple[str, ...] = LAYER_NAMES,
    probe_config: ProbeConfig | None = None,
    balance_seed: int = 0,
) -> ProbeTable:
    """Train one probe per (task, layer) on balanced activations."""
    probe_config = probe_config or ProbeConfig()
    for layer in layers:
        if layer not in LAYER_NAMES:
            raise ConfigError(f"unknown layer {layer!r}; valid layers are {LAYER_NAMES}")
    usable_layers = [l for l in layers if _layer_available(model, l)]
    table = ProbeTable(layers=list(usable_layers), tasks=list(tasks))
    digest_before = model.digest()

    for task in tasks:
        splits = ("TRAIN", "DEV") if task == "SHOW" else ("TRAIN", "DEV", "TEST")
        spec = BalanceSpec(
            task=task, excluded_labels=default_excluded(corpus, task), seed=balance_seed
        )
        balanced = balance_for_task(corpus, spec, splits)
        subsets = {s: balanced.subset(s) for s in splits}
        n_classes = len({u.label(task) for u in subsets["TRAIN"]})
        table.chance[task] = 1.0 / n_classes

        acts = {s: extract_all_layers(model, subsets[s]) for s in splits}
        for layer in usable_layers:
            def acts_for(split: str) -> ActivationSet:
                return ActivationSet(
                    layer=layer,
                    matrix=acts[split][layer],
                    labels=[u.label(task) for u in subsets[split]],
                    utterance_ids=[u.id for u in subsets[split]],
                    source_model_digest=digest_before,
                )

            cell_seed = np.random.SeedSequence(
                [probe_config.seed, hash32(task), hash32(layer)]
            ).generate_state(1)[0]
            cfg = ProbeConfig(
                hidden_size=probe_config.hidden_size,
                dropout_rate=probe_config.dropout_rate,
                epochs=probe_config.epochs,
                batch_size=probe_config.batch_size,
                seed=int(cell_seed),
            )
            probe, log = train_probe(acts_for("TRAIN"), acts_for("DEV"), cfg)
            dev_acc = log.selected_record().dev_accuracy
            test_acc = None
            if "TEST" in splits:
                test_set = acts_for("TEST")
                idx = {c: i for i, c in enumerate(probe.classes)}
                y = np.asarray([idx[l] for l in test_set.labels])
                test_acc = float((probe.predict(test_set.matrix) == y).mean())
            table.cells[(task, layer)] = ProbeCell(
                task=task,
                layer=layer,
                dim=int(acts["TRAIN"][layer].shape[1]),
                dev_accuracy=dev_acc,
                test_accuracy=test_acc,
                chance=table.chance[task],
            )

    if model.digest() != digest_before:
        raise DataError("probe training mutated the source model")
    return table


def hash32(text: str) -> int:
    """Stable 32-bit hash for seeding, independent of the process hash seed."""
    return int.from_bytes(hashlib.sha256(text.encode()).digest()[:4], "little")
