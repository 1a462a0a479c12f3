"""Training loops with seeded shuffling and DEV-based model selection.

Prediction models train on composite loss (MAE over predicted WER plus
weighted task cross-entropies) with Adadelta by default; probes train with
Adam on cross-entropy. After every epoch the DEV split is scored and the
best snapshot (minimum DEV MAE, or maximum DEV accuracy for probes) is kept;
ties go to the earliest epoch. The TEST split is never touched here.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from werprobe import corpus as corpus_mod
from werprobe.analysis import metrics
from werprobe.engine import backward, ops
from werprobe.engine.optim import Adadelta, Adam
from werprobe.engine.tensor import Tensor
from werprobe.errors import (
    ConfigError,
    DataError,
    EmptyBatchError,
    LabelError,
    NumericError,
    ShapeError,
)
from werprobe.model import Model, Probe, composite_loss, load_model, predict_wer, save_model

PREDICTION_LOG_HEADER = (
    "epoch,train_loss,dev_mae,dev_kendall,dev_acc_show,dev_acc_style,dev_acc_accent,selected"
)
PROBE_LOG_HEADER = "epoch,train_loss,dev_accuracy,selected"


@dataclass
class TrainConfig:
    epochs: int = 50
    batch_size: int = 32
    optimizer: str = "adadelta"
    learning_rate: float | None = None
    seed: int = 0
    shuffle: bool = True
    main_weight: float = 1.0
    task_weight: float = 0.3
    eval_batch: int = 256

    def __post_init__(self):
        if self.epochs < 1:
            raise ConfigError(f"epochs must be >= 1, got {self.epochs}")
        if self.batch_size < 1:
            raise ConfigError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.optimizer not in ("adadelta", "adam"):
            raise ConfigError(f"unknown optimizer {self.optimizer!r}")


@dataclass
class EpochRecord:
    epoch: int
    train_loss: float
    dev_mae: float | None = None
    dev_kendall: float | None = None
    dev_acc: dict = field(default_factory=dict)
    dev_accuracy: float | None = None
    selected: bool = False


def _fmt(x: float | None) -> str:
    return "" if x is None else repr(float(x))


@dataclass
class TrainLog:
    kind: str  # "prediction" or "probe"
    records: list = field(default_factory=list)

    def selected_record(self) -> EpochRecord:
        chosen = [r for r in self.records if r.selected]
        if len(chosen) != 1:
            raise DataError(f"log must mark exactly one selected epoch, found {len(chosen)}")
        return chosen[0]

    def to_csv(self) -> str:
        lines = []
        if self.kind == "prediction":
            lines.append(PREDICTION_LOG_HEADER)
            for r in self.records:
                lines.append(
                    ",".join(
                        [
                            str(r.epoch),
                            _fmt(r.train_loss),
                            _fmt(r.dev_mae),
                            _fmt(r.dev_kendall),
                            _fmt(r.dev_acc.get("SHOW")),
                            _fmt(r.dev_acc.get("STYLE")),
                            _fmt(r.dev_acc.get("ACCENT")),
                            "1" if r.selected else "0",
                        ]
                    )
                )
        else:
            lines.append(PROBE_LOG_HEADER)
            for r in self.records:
                lines.append(
                    ",".join(
                        [str(r.epoch), _fmt(r.train_loss), _fmt(r.dev_accuracy),
                         "1" if r.selected else "0"]
                    )
                )
        return "\n".join(lines) + "\n"

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "records": [
                {
                    "epoch": r.epoch,
                    "train_loss": r.train_loss,
                    "dev_mae": r.dev_mae,
                    "dev_kendall": r.dev_kendall,
                    "dev_acc": dict(r.dev_acc),
                    "dev_accuracy": r.dev_accuracy,
                    "selected": r.selected,
                }
                for r in self.records
            ],
        }


@dataclass
class MetricsReport:
    split: str
    n_utterances: int
    mae: float
    kendall: float | None  # tau-b as a percentage
    accuracy: dict
    confusion: dict
    predictions: list  # (utterance id, true wer, predicted wer)


def _task_label_indices(model: Model, task: str, utterances) -> np.ndarray:
    order = model.config.task_labels[task]
    index = {label: i for i, label in enumerate(order)}
    out = np.empty(len(utterances), dtype=np.int64)
    for i, u in enumerate(utterances):
        label = u.label(task)
        if label not in index:
            raise LabelError(f"utterance {u.id}: label {label!r} not in {task} head labels")
        out[i] = index[label]
    return out


def _forward_predictions(model: Model, ids: np.ndarray, signals: np.ndarray,
                         eval_batch: int) -> tuple[np.ndarray, dict[str, np.ndarray]]:
    """Inference pass over the full set, chunked; returns WER predictions and
    per-task argmax predictions."""
    n = ids.shape[0]
    preds = np.empty(n, dtype=np.float64)
    task_preds = {t: np.empty(n, dtype=np.int64) for t in model.config.tasks()}
    for lo in range(0, n, eval_batch):
        hi = min(lo + eval_batch, n)
        out = model.forward(ids[lo:hi], signals[lo:hi])
        preds[lo:hi] = predict_wer(out["wer_logits"], model.config.wer_vector).data
        for t in task_preds:
            task_preds[t][lo:hi] = out[f"logits_{t}"].data.argmax(axis=-1)
    return preds, task_preds


def evaluate_model(model: Model, corpus: "corpus_mod.Corpus", split: str,
                   eval_batch: int = 256) -> MetricsReport:
    """Score one split: MAE, Kendall tau-b (percent), per-task accuracy and
    confusion matrices for every head the model carries."""
    utts = corpus.subset(split)
    if not utts:
        raise EmptyBatchError(f"split {split} is empty")
    ids, signals, wers = corpus_mod.batch_arrays(
        utts, model.config.vocab_size, model.config.text.max_tokens,
        model.config.signal.input_len,
    )
    preds, task_preds = _forward_predictions(model, ids, signals, eval_batch)
    truths = wers.astype(np.float64)
    mae = metrics.mae(preds, truths)
    try:
        kendall = 100.0 * metrics.kendall_tau(truths, preds)
    except NumericError:
        kendall = None
    accuracy = {}
    confusion = {}
    for task in model.config.tasks():
        order = list(model.config.task_labels[task])
        true_idx = _task_label_indices(model, task, utts)
        cm = metrics.confusion_matrix(
            [order[i] for i in true_idx], [order[i] for i in task_preds[task]], order
        )
        confusion[task] = cm
        accuracy[task] = cm.accuracy()
    return MetricsReport(
        split=split,
        n_utterances=len(utts),
        mae=mae,
        kendall=kendall,
        accuracy=accuracy,
        confusion=confusion,
        predictions=[(u.id, float(u.wer), float(p)) for u, p in zip(utts, preds)],
    )


def _build_optimizer(params, config: TrainConfig):
    if config.optimizer == "adam":
        lr = 0.001 if config.learning_rate is None else config.learning_rate
        return Adam(params, lr=lr)
    lr = 1.0 if config.learning_rate is None else config.learning_rate
    return Adadelta(params, lr=lr)


def train_prediction_model(
    model: Model,
    corpus: "corpus_mod.Corpus",
    tasks: tuple[str, ...] = (),
    config: TrainConfig | None = None,
) -> tuple[Model, TrainLog]:
    """Minimize composite loss over TRAIN; return the best-DEV-MAE snapshot."""
    config = config or TrainConfig()
    for task in tasks:
        if task not in model.config.tasks():
            raise ConfigError(f"task {task} requested but the model has no {task} head")
    train_utts = corpus.subset("TRAIN")
    dev_utts = corpus.subset("DEV")
    if not train_utts:
        raise DataError("corpus has no TRAIN utterances")
    if not dev_utts:
        raise DataError("corpus has no DEV utterances")

    mc = model.config
    ids, signals, wers = corpus_mod.batch_arrays(
        train_utts, mc.vocab_size, mc.text.max_tokens, mc.signal.input_len
    )
    dev_ids, dev_signals, dev_wers = corpus_mod.batch_arrays(
        dev_utts, mc.vocab_size, mc.text.max_tokens, mc.signal.input_len
    )
    dev_truths = dev_wers.astype(np.float64)
    task_targets = {t: _task_label_indices(model, t, train_utts) for t in tasks}
    dev_task_truth = {t: _task_label_indices(model, t, dev_utts) for t in mc.tasks()}

    optimizer = _build_optimizer(model.parameters(), config)
    shuffle_rng = np.random.default_rng(np.random.SeedSequence([config.seed, 0]))
    n = len(train_utts)
    log = TrainLog(kind="prediction")
    best_mae = None
    best_state = None
    best_epoch = -1

    for epoch in range(1, config.epochs + 1):
        order = shuffle_rng.permutation(n) if config.shuffle else np.arange(n)
        loss_total = 0.0
        for lo in range(0, n, config.batch_size):
            sel = order[lo : lo + config.batch_size]
            out = model.forward(ids[sel], signals[sel])
            pred = predict_wer(out["wer_logits"], mc.wer_vector)
            loss = composite_loss(
                pred,
                wers[sel],
                {t: out[f"logits_{t}"] for t in tasks},
                {t: task_targets[t][sel] for t in tasks},
                config.main_weight,
                config.task_weight,
            )
            value = float(loss.data)
            if not np.isfinite(value):
                raise NumericError(f"non-finite training loss at epoch {epoch}")
            loss_total += value * len(sel)
            backward(loss)
            optimizer.step()
            optimizer.zero_grad()

        dev_preds, dev_task_preds = _forward_predictions(
            model, dev_ids, dev_signals, config.eval_batch
        )
        dev_mae = metrics.mae(dev_preds, dev_truths)
        try:
            dev_kendall = 100.0 * metrics.kendall_tau(dev_truths, dev_preds)
        except NumericError:
            dev_kendall = None
        dev_acc = {
            t: float((dev_task_preds[t] == dev_task_truth[t]).mean()) for t in mc.tasks()
        }
        log.records.append(
            EpochRecord(
                epoch=epoch,
                train_loss=loss_total / n,
                dev_mae=dev_mae,
                dev_kendall=dev_kendall,
                dev_acc=dev_acc,
            )
        )
        if best_mae is None or dev_mae < best_mae:
            best_mae = dev_mae
            best_state = model.state_arrays()
            best_epoch = epoch

    for r in log.records:
        r.selected = r.epoch == best_epoch
    best_model = Model(mc, init=False)
    best_model.load_state_arrays(best_state)
    return best_model, log


def train_probe(activations_train, activations_dev, probe_config) -> tuple[Probe, TrainLog]:
    """Train a shallow classifier on frozen activations; keep the epoch with
    the best DEV accuracy. Inputs are activation sets (matrix + labels)."""
    x_train = np.asarray(activations_train.matrix, dtype=np.float32)
    x_dev = np.asarray(activations_dev.matrix, dtype=np.float32)
    if x_train.ndim != 2 or x_dev.ndim != 2 or x_train.shape[1] != x_dev.shape[1]:
        raise ShapeError(
            f"activation dims differ: train {x_train.shape}, dev {x_dev.shape}"
        )
    classes = sorted(set(activations_train.labels))
    if len(classes) < 2:
        raise DataError(f"probe training needs >= 2 classes, got {classes}")
    index = {c: i for i, c in enumerate(classes)}
    try:
        y_train = np.asarray([index[c] for c in activations_train.labels], dtype=np.int64)
        y_dev = np.asarray([index[c] for c in activations_dev.labels], dtype=np.int64)
    except KeyError as e:
        raise LabelError(f"DEV label {e} absent from probe training labels") from e

    probe = Probe(
        input_dim=x_train.shape[1],
        n_classes=len(classes),
        hidden_size=probe_config.hidden_size,
        dropout_rate=probe_config.dropout_rate,
        seed=probe_config.seed,
    )
    probe.classes = classes
    optimizer = Adam(probe.parameters())
    shuffle_rng = np.random.default_rng(np.random.SeedSequence([probe_config.seed, 0]))
    dropout_rng = np.random.default_rng(np.random.SeedSequence([probe_config.seed, 1]))
    n = x_train.shape[0]
    log = TrainLog(kind="probe")
    best_acc = None
    best_state = None
    best_epoch = -1

    for epoch in range(1, probe_config.epochs + 1):
        order = shuffle_rng.permutation(n)
        loss_total = 0.0
        for lo in range(0, n, probe_config.batch_size):
            sel = order[lo : lo + probe_config.batch_size]
            probs = probe.forward(Tensor(x_train[sel]), training=True, rng=dropout_rng)
            loss = ops.cross_entropy(probs, y_train[sel])
            value = float(loss.data)
            if not np.isfinite(value):
                raise NumericError(f"non-finite probe loss at epoch {epoch}")
            loss_total += value * len(sel)
            backward(loss)
            optimizer.step()
            optimizer.zero_grad()
        acc = float((probe.predict(x_dev) == y_dev).mean())
        log.records.append(
            EpochRecord(epoch=epoch, train_loss=loss_total / n, dev_accuracy=acc)
        )
        if best_acc is None or acc > best_acc:
            best_acc = acc
            best_state = {k: p.data.copy() for k, p in probe.params.items()}
            best_epoch = epoch

    for r in log.records:
        r.selected = r.epoch == best_epoch
    for k, p in probe.params.items():
        p.data = best_state[k]
    return probe, log


def save_checkpoint(model: Model, log: TrainLog | None, path: str,
                    extra_metadata: dict | None = None) -> None:
    meta = dict(extra_metadata or {})
    if log is not None:
        meta["log"] = log.to_dict()
        selected = log.selected_record()
        if log.kind == "prediction":
            meta["dev_mae"] = selected.dev_mae
        else:
            meta["dev_accuracy"] = selected.dev_accuracy
    save_model(model, path, meta)


def load_checkpoint(path: str) -> tuple[Model, dict]:
    return load_model(path)
