"""The WER prediction network and its serialization.

Two encoders feed a fusion trunk: a text encoder (parallel width-w
convolutions over embedded tokens, max-over-time pooled, then two dense
layers: A1 -> A2 -> A3) and a raw-signal encoder (a conv/pool stack ending
in global average pooling, then three dense layers: B1 -> B2 -> B3 -> B4).
Their outputs are concatenated (C1) and passed through one dense layer (C2).
The WER head turns C2 into logits over fixed WER bin centers; the predicted
WER is the expectation of the softmax distribution over those centers.
Optional per-task heads (SHOW/STYLE/ACCENT) branch off C2 for multi-task
training.
"""

from __future__ import annotations

import hashlib
import io
import json
import struct
from dataclasses import dataclass, field

import numpy as np

from werprobe.engine import ops
from werprobe.engine.tensor import Parameter, Tensor, get_default_dtype
from werprobe.errors import (
    ConfigError,
    FormatError,
    LabelError,
    ShapeError,
    VersionError,
)

TASK_ORDER = ("SHOW", "STYLE", "ACCENT")
LAYER_NAMES = ("A1", "A2", "A3", "B1", "B2", "B3", "B4", "C1", "C2")

CHECKPOINT_MAGIC = b"WPRB"
CHECKPOINT_VERSION = 1


@dataclass(frozen=True)
class LayerSpec:
    """Named output widths of the nine analysis layers."""

    A1: int
    A2: int
    A3: int
    B1: int
    B2: int
    B3: int
    B4: int
    C1: int
    C2: int

    def __post_init__(self):
        for name in LAYER_NAMES:
            if getattr(self, name) < 1:
                raise ConfigError(f"layer width {name} must be positive")

    def width(self, layer: str) -> int:
        if layer not in LAYER_NAMES:
            raise ConfigError(f"unknown layer {layer!r}; expected one of {LAYER_NAMES}")
        return getattr(self, layer)

    @classmethod
    def desk(cls) -> "LayerSpec":
        return cls(A1=160, A2=32, A3=16, B1=64, B2=64, B3=32, B4=16, C1=32, C2=16)

    @classmethod
    def paper_scale(cls) -> "LayerSpec":
        return cls(A1=1280, A2=256, A3=128, B1=512, B2=512, B3=256, B4=128, C1=256, C2=128)


@dataclass(frozen=True)
class WerVector:
    """Strictly ascending WER bin centers (percent)."""

    centers: tuple[float, ...]

    def __post_init__(self):
        c = self.centers
        if not c:
            raise ConfigError("WerVector needs at least one center")
        if any(b <= a for a, b in zip(c, c[1:])):
            raise ConfigError("WerVector centers must be strictly ascending")
        if c[0] < 0.0:
            raise ConfigError("WerVector centers must be non-negative")

    def __len__(self) -> int:
        return len(self.centers)

    @classmethod
    def default(cls, wer_max: float = 150.0, step: float = 3.0) -> "WerVector":
        n = int(round(wer_max / step)) + 1
        return cls(tuple(float(i * step) for i in range(n)))


@dataclass(frozen=True)
class TextConfig:
    max_tokens: int = 64
    embed_dim: int = 32
    filter_widths: tuple[int, ...] = (1, 2, 3, 4, 5)


@dataclass(frozen=True)
class SignalConfig:
    """Raw-signal conv stack; each stage is (channels, kernel, stride, pool)."""

    input_len: int = 12000
    stages: tuple[tuple[int, int, int, int], ...] = (
        (8, 32, 8, 4),
        (16, 8, 1, 4),
        (32, 4, 1, 2),
        (64, 4, 1, 2),
    )


@dataclass
class ModelConfig:
    layer_spec: LayerSpec
    vocab_size: int
    text: TextConfig = field(default_factory=TextConfig)
    signal: SignalConfig = field(default_factory=SignalConfig)
    wer_vector: WerVector = field(default_factory=WerVector.default)
    task_labels: dict = field(default_factory=dict)
    branches: tuple[str, ...] = ("text", "signal")
    seed: int = 0

    def __post_init__(self):
        if not self.branches or any(b not in ("text", "signal") for b in self.branches):
            raise ConfigError(f"branches must be a nonempty subset of (text, signal), got {self.branches}")
        for task in self.task_labels:
            if task not in TASK_ORDER:
                raise ConfigError(f"unknown task {task!r}; expected subset of {TASK_ORDER}")
            if len(self.task_labels[task]) < 2:
                raise ConfigError(f"task {task} needs at least 2 labels")
        ls = self.layer_spec
        if "text" in self.branches and ls.A1 % len(self.text.filter_widths) != 0:
            raise ConfigError(
                f"A1={ls.A1} not divisible by {len(self.text.filter_widths)} filter widths"
            )
        if "signal" in self.branches and self.signal.stages[-1][0] != ls.B1:
            raise ConfigError(
                f"last signal stage has {self.signal.stages[-1][0]} channels, B1={ls.B1}"
            )
        fused = 0
        if "text" in self.branches:
            fused += ls.A3
        if "signal" in self.branches:
            fused += ls.B4
        if ls.C1 != fused:
            raise ConfigError(f"C1={ls.C1} must equal the fused width {fused}")

    @property
    def filters_per_width(self) -> int:
        return self.layer_spec.A1 // len(self.text.filter_widths)

    def tasks(self) -> tuple[str, ...]:
        return tuple(t for t in TASK_ORDER if t in self.task_labels)

    def to_dict(self) -> dict:
        return {
            "layer_spec": dict(self.layer_spec.__dict__),
            "vocab_size": self.vocab_size,
            "text": {
                "max_tokens": self.text.max_tokens,
                "embed_dim": self.text.embed_dim,
                "filter_widths": list(self.text.filter_widths),
            },
            "signal": {
                "input_len": self.signal.input_len,
                "stages": [list(s) for s in self.signal.stages],
            },
            "wer_vector": list(self.wer_vector.centers),
            "task_labels": {t: list(v) for t, v in self.task_labels.items()},
            "branches": list(self.branches),
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ModelConfig":
        return cls(
            layer_spec=LayerSpec(**d["layer_spec"]),
            vocab_size=d["vocab_size"],
            text=TextConfig(
                max_tokens=d["text"]["max_tokens"],
                embed_dim=d["text"]["embed_dim"],
                filter_widths=tuple(d["text"]["filter_widths"]),
            ),
            signal=SignalConfig(
                input_len=d["signal"]["input_len"],
                stages=tuple(tuple(s) for s in d["signal"]["stages"]),
            ),
            wer_vector=WerVector(tuple(d["wer_vector"])),
            task_labels={t: tuple(v) for t, v in d["task_labels"].items()},
            branches=tuple(d["branches"]),
            seed=d["seed"],
        )


def desk_config(vocab_size: int, task_labels: dict | None = None, seed: int = 0) -> ModelConfig:
    return ModelConfig(
        layer_spec=LayerSpec.desk(),
        vocab_size=vocab_size,
        task_labels=dict(task_labels or {}),
        seed=seed,
    )


def _param_rng(seed: int, name: str) -> np.random.Generator:
    """Independent stream per parameter name, so adding parameters elsewhere
    in the model leaves every other parameter's initial value unchanged."""
    tag = int.from_bytes(hashlib.sha256(name.encode()).digest()[:8], "little")
    return np.random.default_rng(np.random.SeedSequence([seed, tag]))


def glorot_uniform(rng: np.random.Generator, shape: tuple[int, ...], fan_in: int, fan_out: int) -> np.ndarray:
    limit = float(np.sqrt(6.0 / (fan_in + fan_out)))
    return rng.uniform(-limit, limit, size=shape)


class Model:
    """Named-parameter realization of one ModelConfig."""

    def __init__(self, config: ModelConfig, init: bool = True):
        self.config = config
        self.params: dict[str, Parameter] = {}
        ls = config.layer_spec
        if "text" in config.branches:
            self._add("embed.table", (config.vocab_size, config.text.embed_dim))
            fpw = config.filters_per_width
            for w in config.text.filter_widths:
                self._add("text.conv%d.kernel" % w, (fpw, config.text.embed_dim, w))
                self._add("text.conv%d.bias" % w, (fpw,))
            self._add_dense("text.A2", ls.A1, ls.A2)
            self._add_dense("text.A3", ls.A2, ls.A3)
        if "signal" in config.branches:
            length = config.signal.input_len
            c_in = 1
            for i, (c_out, k, stride, pool) in enumerate(config.signal.stages):
                if k > length:
                    raise ConfigError(
                        f"signal stage {i}: kernel {k} exceeds remaining length {length}"
                    )
                length = (length - k) // stride + 1
                if pool > length:
                    raise ConfigError(
                        f"signal stage {i}: pool {pool} exceeds remaining length {length}"
                    )
                length = (length - pool) // pool + 1
                self._add("sig.stage%d.kernel" % i, (c_out, c_in, k))
                self._add("sig.stage%d.bias" % i, (c_out,))
                c_in = c_out
            self._add_dense("sig.B2", ls.B1, ls.B2)
            self._add_dense("sig.B3", ls.B2, ls.B3)
            self._add_dense("sig.B4", ls.B3, ls.B4)
        self._add_dense("fuse.C2", ls.C1, ls.C2)
        self._add_dense("head.wer", ls.C2, len(config.wer_vector))
        for task in config.tasks():
            self._add_dense("head.%s" % task, ls.C2, len(config.task_labels[task]))
        if init:
            self._initialize()

    def _add(self, name: str, shape: tuple[int, ...]) -> None:
        self.params[name] = Parameter(name, np.zeros(shape, dtype=get_default_dtype()))

    def _add_dense(self, prefix: str, n_in: int, n_out: int) -> None:
        self._add(prefix + ".weight", (n_out, n_in))
        self._add(prefix + ".bias", (n_out,))

    def _initialize(self) -> None:
        seed = self.config.seed
        for name, p in self.params.items():
            rng = _param_rng(seed, name)
            shape = p.data.shape
            if name == "embed.table":
                table = rng.uniform(-0.05, 0.05, size=shape)
                table[0] = 0.0  # padding row stays zero, and is never updated
                value = table
            elif name.endswith(".bias"):
                value = np.zeros(shape)
            elif name.endswith(".kernel"):
                c_out, c_in, k = shape
                value = glorot_uniform(rng, shape, c_in * k, c_out * k)
            elif name.endswith(".weight"):
                n_out, n_in = shape
                value = glorot_uniform(rng, shape, n_in, n_out)
            else:
                raise ConfigError(f"no initialization rule for parameter {name!r}")
            p.data = value.astype(p.data.dtype)
            p.grad = np.zeros_like(p.data)

    # -- bookkeeping -------------------------------------------------------

    def parameters(self) -> list[Parameter]:
        return [self.params[name] for name in sorted(self.params)]

    def parameter_count(self) -> int:
        return sum(p.data.size for p in self.params.values())

    def zero_grad(self) -> None:
        for p in self.params.values():
            p.zero_grad()

    def copy(self) -> "Model":
        clone = Model(self.config, init=False)
        for name, p in self.params.items():
            clone.params[name].data = p.data.copy()
        return clone

    def state_arrays(self) -> dict[str, np.ndarray]:
        return {name: p.data.copy() for name, p in self.params.items()}

    def load_state_arrays(self, state: dict[str, np.ndarray]) -> None:
        for name, p in self.params.items():
            if name not in state:
                raise FormatError(f"checkpoint is missing parameter {name!r}")
            if state[name].shape != p.data.shape:
                raise ShapeError(
                    f"parameter {name}: checkpoint shape {state[name].shape} "
                    f"!= model shape {p.data.shape}"
                )
            p.data = state[name].astype(p.data.dtype, copy=True)

    def digest(self) -> str:
        h = hashlib.sha256()
        for name in sorted(self.params):
            p = self.params[name]
            h.update(name.encode())
            h.update(str(p.data.shape).encode())
            h.update(np.ascontiguousarray(p.data, dtype="<f4").tobytes())
        return h.hexdigest()

    # -- forward passes ----------------------------------------------------

    def text_encoder_forward(self, token_ids: np.ndarray) -> dict[str, Tensor]:
        """Token id matrix (n, max_tokens) -> {A1, A2, A3} activations."""
        if "text" not in self.config.branches:
            raise ConfigError("text branch is not part of this model")
        ids = np.asarray(token_ids, dtype=np.int64)
        if ids.ndim != 2 or ids.shape[1] != self.config.text.max_tokens:
            raise ShapeError(
                f"token ids shape {ids.shape} != (n, {self.config.text.max_tokens})"
            )
        emb = ops.embedding(self.params["embed.table"], ids)  # (n, T, d)
        x = ops.swap_last_axes(emb)  # (n, d, T)
        pooled = []
        for w in self.config.text.filter_widths:
            y = ops.conv1d(x, self.params[f"text.conv{w}.kernel"], self.params[f"text.conv{w}.bias"])
            pooled.append(ops.global_max_pool(ops.relu(y)))
        a1 = ops.concat(pooled, axis=-1)
        a2 = ops.relu(ops.dense(a1, self.params["text.A2.weight"], self.params["text.A2.bias"]))
        a3 = ops.relu(ops.dense(a2, self.params["text.A3.weight"], self.params["text.A3.bias"]))
        return {"A1": a1, "A2": a2, "A3": a3}

    def signal_encoder_forward(self, signals: np.ndarray) -> dict[str, Tensor]:
        """Signal matrix (n, input_len) -> {B1, B2, B3, B4} activations."""
        if "signal" not in self.config.branches:
            raise ConfigError("signal branch is not part of this model")
        sig = np.asarray(signals)
        if sig.ndim != 2 or sig.shape[1] != self.config.signal.input_len:
            raise ShapeError(
                f"signal shape {sig.shape} != (n, {self.config.signal.input_len})"
            )
        x = Tensor(sig[:, None, :])
        for i, (_, _, stride, pool) in enumerate(self.config.signal.stages):
            x = ops.conv1d(
                x, self.params[f"sig.stage{i}.kernel"], self.params[f"sig.stage{i}.bias"], stride
            )
            x = ops.maxpool1d(ops.relu(x), pool, pool)
        b1 = ops.global_avg_pool(x)
        b2 = ops.relu(ops.dense(b1, self.params["sig.B2.weight"], self.params["sig.B2.bias"]))
        b3 = ops.relu(ops.dense(b2, self.params["sig.B3.weight"], self.params["sig.B3.bias"]))
        b4 = ops.relu(ops.dense(b3, self.params["sig.B4.weight"], self.params["sig.B4.bias"]))
        return {"B1": b1, "B2": b2, "B3": b3, "B4": b4}

    def fuse_and_head(self, a3: Tensor | None, b4: Tensor | None) -> dict[str, Tensor]:
        parts = []
        if "text" in self.config.branches:
            if a3 is None:
                raise ConfigError("model has a text branch but no A3 input was given")
            parts.append(a3)
        if "signal" in self.config.branches:
            if b4 is None:
                raise ConfigError("model has a signal branch but no B4 input was given")
            parts.append(b4)
        c1 = parts[0] if len(parts) == 1 else ops.concat(parts, axis=-1)
        c2 = ops.relu(ops.dense(c1, self.params["fuse.C2.weight"], self.params["fuse.C2.bias"]))
        out = {"C1": c1, "C2": c2}
        out["wer_logits"] = ops.dense(c2, self.params["head.wer.weight"], self.params["head.wer.bias"])
        for task in self.config.tasks():
            out[f"logits_{task}"] = ops.dense(
                c2, self.params[f"head.{task}.weight"], self.params[f"head.{task}.bias"]
            )
        return out

    def forward(self, token_ids: np.ndarray | None, signals: np.ndarray | None) -> dict[str, Tensor]:
        """Full forward pass; returns every named layer plus head logits."""
        out: dict[str, Tensor] = {}
        a3 = b4 = None
        if "text" in self.config.branches:
            text_out = self.text_encoder_forward(token_ids)
            out.update(text_out)
            a3 = text_out["A3"]
        if "signal" in self.config.branches:
            sig_out = self.signal_encoder_forward(signals)
            out.update(sig_out)
            b4 = sig_out["B4"]
        out.update(self.fuse_and_head(a3, b4))
        return out


def predict_wer(wer_logits: Tensor, wer_vector: WerVector) -> Tensor:
    """Expected WER under the softmax over bin centers; bounded by the centers."""
    centers = np.asarray(wer_vector.centers, dtype=wer_logits.data.dtype)
    if wer_logits.data.shape[-1] != centers.shape[0]:
        raise ShapeError(
            f"wer logits width {wer_logits.data.shape[-1]} != {centers.shape[0]} centers"
        )
    probs = ops.softmax(wer_logits)
    pred = ops.dot_const(probs, centers)
    # rounding in the softmax normalization can spill a few ulps past the
    # center range; the clip never binds during training
    np.clip(pred.data, centers[0], centers[-1], out=pred.data)
    return pred


def composite_loss(
    wer_pred: Tensor,
    wer_true: np.ndarray,
    task_logits: dict[str, Tensor],
    task_labels: dict[str, np.ndarray],
    main_weight: float = 1.0,
    task_weight: float = 0.3,
) -> Tensor:
    """main_weight * MAE + task_weight * sum of per-task cross-entropies.

    With task_weight == 0 the task terms are skipped entirely, so the loss
    graph (and every gradient) is identical to the plain WER-only loss.
    """
    loss = ops.mae_loss(wer_pred, np.asarray(wer_true, dtype=wer_pred.data.dtype))
    if main_weight != 1.0:
        loss = loss * main_weight
    if task_weight != 0.0:
        for task in TASK_ORDER:
            if task not in task_logits:
                continue
            if task not in task_labels:
                raise LabelError(f"task {task} has logits but no labels in this batch")
            ce = ops.cross_entropy(ops.softmax(task_logits[task]), task_labels[task])
            loss = loss + ce * task_weight
    return loss


class Probe:
    """Shallow classifier over frozen activations:
    dense -> dropout -> ReLU -> dense -> softmax."""

    def __init__(self, input_dim: int, n_classes: int, hidden_size: int = 128,
                 dropout_rate: float = 0.5, seed: int = 0):
        if input_dim < 1 or n_classes < 2 or hidden_size < 1:
            raise ConfigError(
                f"bad probe dims: input {input_dim}, classes {n_classes}, hidden {hidden_size}"
            )
        if not 0.0 <= dropout_rate < 1.0:
            raise ConfigError(f"dropout rate must be in [0, 1), got {dropout_rate}")
        self.input_dim = input_dim
        self.n_classes = n_classes
        self.hidden_size = hidden_size
        self.dropout_rate = dropout_rate
        dt = get_default_dtype()
        mk = lambda name, arr: Parameter(name, arr.astype(dt))
        r1 = _param_rng(seed, "probe.hidden.weight")
        r2 = _param_rng(seed, "probe.out.weight")
        self.params = {
            "probe.hidden.weight": mk(
                "probe.hidden.weight",
                glorot_uniform(r1, (hidden_size, input_dim), input_dim, hidden_size),
            ),
            "probe.hidden.bias": mk("probe.hidden.bias", np.zeros(hidden_size)),
            "probe.out.weight": mk(
                "probe.out.weight",
                glorot_uniform(r2, (n_classes, hidden_size), hidden_size, n_classes),
            ),
            "probe.out.bias": mk("probe.out.bias", np.zeros(n_classes)),
        }

    def parameters(self) -> list[Parameter]:
        return [self.params[name] for name in sorted(self.params)]

    def parameter_count(self) -> int:
        return sum(p.data.size for p in self.params.values())

    def forward(self, x: Tensor, training: bool = False,
                rng: np.random.Generator | None = None) -> Tensor:
        h = ops.dense(x, self.params["probe.hidden.weight"], self.params["probe.hidden.bias"])
        h = ops.dropout(h, self.dropout_rate, training, rng)
        h = ops.relu(h)
        logits = ops.dense(h, self.params["probe.out.weight"], self.params["probe.out.bias"])
        return ops.softmax(logits)

    def predict(self, matrix: np.ndarray) -> np.ndarray:
        probs = self.forward(Tensor(matrix), training=False)
        return probs.data.argmax(axis=-1)

    def copy(self) -> "Probe":
        clone = Probe(self.input_dim, self.n_classes, self.hidden_size, self.dropout_rate)
        for name, p in self.params.items():
            clone.params[name].data = p.data.copy()
        return clone


# -- checkpoint format -----------------------------------------------------
# magic "WPRB" | u16 version | u32 metadata length | canonical-JSON metadata
# | u32 parameter count | records sorted by name, each:
#   u32 name length | name utf-8 | u32 rank | u32 dims... | raw f32 LE data


def serialize_checkpoint(model: Model, metadata: dict | None = None) -> bytes:
    meta = {
        "config": model.config.to_dict(),
        "parameter_count": model.parameter_count(),
        "seed": model.config.seed,
    }
    if metadata:
        meta.update(metadata)
    meta_bytes = json.dumps(meta, sort_keys=True, separators=(",", ":")).encode("utf-8")
    buf = io.BytesIO()
    buf.write(CHECKPOINT_MAGIC)
    buf.write(struct.pack("<H", CHECKPOINT_VERSION))
    buf.write(struct.pack("<I", len(meta_bytes)))
    buf.write(meta_bytes)
    buf.write(struct.pack("<I", len(model.params)))
    for name in sorted(model.params):
        data = np.ascontiguousarray(model.params[name].data, dtype="<f4")
        nb = name.encode("utf-8")
        buf.write(struct.pack("<I", len(nb)))
        buf.write(nb)
        buf.write(struct.pack("<I", data.ndim))
        buf.write(struct.pack("<%dI" % data.ndim, *data.shape))
        buf.write(data.tobytes())
    return buf.getvalue()


def save_model(model: Model, path: str, metadata: dict | None = None) -> None:
    with open(path, "wb") as f:
        f.write(serialize_checkpoint(model, metadata))


def _read_exact(f, n: int, what: str) -> bytes:
    b = f.read(n)
    if len(b) != n:
        raise FormatError(f"checkpoint truncated while reading {what}")
    return b


def load_model(path: str) -> tuple[Model, dict]:
    """Read a checkpoint; returns the model and its metadata block."""
    with open(path, "rb") as f:
        magic = _read_exact(f, 4, "magic")
        if magic != CHECKPOINT_MAGIC:
            raise FormatError(f"bad checkpoint magic {magic!r}")
        (version,) = struct.unpack("<H", _read_exact(f, 2, "version"))
        if version != CHECKPOINT_VERSION:
            raise VersionError(
                f"unsupported checkpoint version {version}; this build reads {CHECKPOINT_VERSION}"
            )
        (meta_len,) = struct.unpack("<I", _read_exact(f, 4, "metadata length"))
        meta = json.loads(_read_exact(f, meta_len, "metadata").decode("utf-8"))
        (n_params,) = struct.unpack("<I", _read_exact(f, 4, "parameter count"))
        state: dict[str, np.ndarray] = {}
        for _ in range(n_params):
            (name_len,) = struct.unpack("<I", _read_exact(f, 4, "name length"))
            name = _read_exact(f, name_len, "name").decode("utf-8")
            (rank,) = struct.unpack("<I", _read_exact(f, 4, "rank"))
            dims = struct.unpack("<%dI" % rank, _read_exact(f, 4 * rank, "dims"))
            count = int(np.prod(dims)) if rank else 1
            raw = _read_exact(f, 4 * count, f"data of {name}")
            state[name] = np.frombuffer(raw, dtype="<f4").reshape(dims).copy()
        trailing = f.read(1)
        if trailing:
            raise FormatError("checkpoint has trailing bytes after the last record")
    config = ModelConfig.from_dict(meta["config"])
    model = Model(config, init=False)
    if set(state) != set(model.params):
        missing = sorted(set(model.params) - set(state))
        extra = sorted(set(state) - set(model.params))
        raise FormatError(f"checkpoint parameters mismatch: missing {missing}, extra {extra}")
    model.load_state_arrays(state)
    return model, meta


def expected_parameter_count(config: ModelConfig) -> int:
    """Parameter count as pure arithmetic over the config."""
    ls = config.layer_spec
    total = 0
    if "text" in config.branches:
        total += config.vocab_size * config.text.embed_dim
        fpw = config.filters_per_width
        for w in config.text.filter_widths:
            total += fpw * config.text.embed_dim * w + fpw
        total += ls.A1 * ls.A2 + ls.A2
        total += ls.A2 * ls.A3 + ls.A3
    if "signal" in config.branches:
        c_in = 1
        for c_out, k, _, _ in config.signal.stages:
            total += c_out * c_in * k + c_out
            c_in = c_out
        total += ls.B1 * ls.B2 + ls.B2
        total += ls.B2 * ls.B3 + ls.B3
        total += ls.B3 * ls.B4 + ls.B4
    total += ls.C1 * ls.C2 + ls.C2
    total += ls.C2 * len(config.wer_vector) + len(config.wer_vector)
    for task in config.tasks():
        k = len(config.task_labels[task])
        total += ls.C2 * k + k
    return total
